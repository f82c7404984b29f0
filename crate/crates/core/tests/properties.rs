use proptest::prelude::*;

use qdt_core::builders::{spsa_builder, Built};
use qdt_core::circuits::{parse_qasm3_mixer, render_qasm3, simulate, AngleExpr, Circuit, Gate, GateKind};
use qdt_core::encodings::{bits_to_spins, qubo_to_ising, QuboModel};
use qdt_core::engine::{ResultRecord, Value};
use qdt_core::problems::{OptimizationProblem, ProblemClass, ProblemInstance, Solution};
use qdt_core::queries::{resolve, validate, AnswerOrigin, Query, Resolution};
use qdt_core::solvers::{HistoryEntry, SolverStats};

fn qubo(n: usize) -> impl Strategy<Value = QuboModel> {
    (
        prop::collection::vec(-5.0..5.0f64, n * (n + 1) / 2),
        -3.0..3.0f64,
    )
        .prop_map(move |(coefs, offset)| {
            let mut q = QuboModel::new(n);
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    q.add_quadratic(i, j, coefs[k]);
                    k += 1;
                }
            }
            q.add_offset(offset);
            q
        })
}

fn bits(x: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((x >> i) & 1) as u8).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qubo_and_ising_energies_agree(q in qubo(6)) {
        let ising = qubo_to_ising(&q);
        for x in 0..1usize << 6 {
            let b = bits(x, 6);
            let e = q.energy(&b).unwrap();
            let z = ising.energy(&bits_to_spins(&b)).unwrap();
            prop_assert!((e - z).abs() <= 1e-9 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn instance_records_round_trip(seed in any::<u64>(), n in 3usize..9, tsp in any::<bool>()) {
        let class = if tsp { ProblemClass::Tsp } else { ProblemClass::MaxCut };
        let inst = ProblemInstance::create_random(class, n, seed).unwrap();
        let back = ProblemInstance::from_record(&inst.to_record()).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_record(), inst.to_record());
    }

    #[test]
    fn result_records_round_trip(
        bits in prop::collection::vec(0u8..2, 1..10),
        energy in -100.0..100.0f64,
        objective in -100.0..100.0f64,
        iters in 0usize..1000,
        path in prop::collection::vec("[a-z_]{1,12}", 1..12),
    ) {
        let record = ResultRecord {
            run_id: "20260101T000000.000Z-abcd".into(),
            timestamp: "2026-01-01T00:00:00.000Z".into(),
            problem_class: Some(ProblemClass::MaxCut),
            solution: Some(Solution::Partition(bits.clone())),
            objective: Some(objective),
            raw_energy: energy,
            solver_name: "tabu".into(),
            solver_stats: SolverStats { iterations: iters, circuit_evaluations: 0, wall_time_ms: 3 },
            trace: path.iter().rev().cloned().collect(),
            path,
            best_bits: Some(bits),
            history: vec![HistoryEntry { iteration: 0, parameters: vec![energy], energy }],
            ..ResultRecord::default()
        };
        let back: ResultRecord = serde_json::from_str(&record.to_json_string()).unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn gates_preserve_norm(ops in prop::collection::vec((0usize..9, 0usize..4, 1usize..4, -6.0..6.0f64), 1..200)) {
        let kinds = [
            GateKind::H, GateKind::X, GateKind::Rx, GateKind::Ry, GateKind::Rz,
            GateKind::Rzz, GateKind::RxxPlusRyy, GateKind::Cx, GateKind::Cz,
        ];
        let gates: Vec<Gate> = ops
            .iter()
            .map(|&(k, a, d, t)| {
                let kind = kinds[k];
                let qs = if kind.arity() == 1 { vec![a] } else { vec![a, (a + d) % 4] };
                let angle = kind.is_rotation().then_some(AngleExpr::Literal(t));
                Gate::new(kind, qs, angle).unwrap()
            })
            .collect();
        let c = Circuit::new(4, gates).unwrap();
        let state = simulate(&c, &Default::default(), 16).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn qasm_render_then_parse_is_identity(
        n in 1usize..6,
        ops in prop::collection::vec((0usize..7, 0usize..6, 1usize..6, -3.0..3.0f64, 0usize..4), 0..30),
    ) {
        let kinds = [GateKind::H, GateKind::X, GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::Cx, GateKind::Cz];
        let gates: Vec<Gate> = ops
            .iter()
            .filter(|&&(k, _, _, _, _)| n > 1 || kinds[k].arity() == 1)
            .map(|&(k, a, d, t, form)| {
                let kind = kinds[k];
                let q0 = a % n;
                let qs = if kind.arity() == 1 { vec![q0] } else { vec![q0, (q0 + 1 + d % (n - 1)) % n] };
                let angle = kind.is_rotation().then(|| match form {
                    0 => AngleExpr::Literal(t),
                    1 => AngleExpr::Symbol("beta".into()),
                    2 => AngleExpr::scaled(t, "beta"),
                    _ => AngleExpr::scaled(t, "gamma"),
                });
                Gate::new(kind, qs, angle).unwrap()
            })
            .collect();
        let c = Circuit::new(n, gates).unwrap();
        let text = render_qasm3(&c).unwrap();
        prop_assert_eq!(parse_qasm3_mixer(&text).unwrap(), c);
    }

    #[test]
    fn builder_binding_order_is_irrelevant(
        maxiter in 1i64..500,
        a in 0.01..2.0f64,
        c in 0.01..2.0f64,
        perm in Just(vec!["maxiter", "a", "c"]).prop_shuffle(),
    ) {
        let values = |name: &str| match name {
            "maxiter" => Value::Int(maxiter),
            "a" => Value::Real(a),
            _ => Value::Real(c),
        };
        let mut forward = spsa_builder();
        for name in ["maxiter", "a", "c"] {
            forward.set_value(name, values(name)).unwrap();
        }
        let mut shuffled = spsa_builder();
        for name in &perm {
            shuffled.set_value(name, values(name)).unwrap();
        }
        let built = forward.build().unwrap();
        prop_assert!(matches!(built, Built::Optimizer(_)));
        prop_assert_eq!(built, shuffled.build().unwrap());
    }

    #[test]
    fn accepted_answers_always_validate(raw in "[ -~]{0,8}", min in -5i64..5) {
        let q = Query::int("n", "n?", Some(min), None).with_default(Value::Int(min));
        if let Resolution::Value(v, origin) = resolve(&q, &raw, AnswerOrigin::User) {
            let again = validate(&q, &v.to_string());
            prop_assert_eq!(again, Ok(v));
            prop_assert!(origin == AnswerOrigin::User || raw.trim().is_empty());
        }
    }
}
