use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AngleExpr, Circuit, CircuitError, Gate, GateKind};
use crate::encodings::IsingModel;

pub const MIXER_PARAMETER: &str = "beta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixerTemplate {
    X,
    XY,
    Ring,
}

impl MixerTemplate {
    pub const ALL: [MixerTemplate; 3] = [MixerTemplate::X, MixerTemplate::XY, MixerTemplate::Ring];

    pub fn name(self) -> &'static str {
        match self {
            MixerTemplate::X => "X",
            MixerTemplate::XY => "XY",
            MixerTemplate::Ring => "Ring",
        }
    }
}

impl fmt::Display for MixerTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    Cz,
    Cx,
}

impl Entangler {
    pub fn gate(self) -> GateKind {
        match self {
            Entangler::Cz => GateKind::Cz,
            Entangler::Cx => GateKind::Cx,
        }
    }
}

impl FromStr for Entangler {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cz" => Ok(Entangler::Cz),
            "cx" => Ok(Entangler::Cx),
            other => Err(CircuitError::InvalidArgument(format!("unknown entangler `{other}`"))),
        }
    }
}

/// Mixer with the single parameter `beta`.
///
/// * X: `rx(2β)` on every qubit.
/// * Ring: `rxx_plus_ryy(β)` on the nearest-neighbour cycle `(i, i+1 mod n)`.
/// * XY: `rxx_plus_ryy(β)` on every pair `i < j`.
pub fn build_mixer(template: MixerTemplate, num_qubits: usize) -> Result<Circuit, CircuitError> {
    let min = if template == MixerTemplate::X { 1 } else { 2 };
    if num_qubits < min {
        return Err(CircuitError::TooFewQubits { min, got: num_qubits });
    }
    let beta = || AngleExpr::Symbol(MIXER_PARAMETER.into());
    let gates = match template {
        MixerTemplate::X => (0..num_qubits)
            .map(|q| Gate::rotation(GateKind::Rx, &[q], AngleExpr::scaled(2.0, MIXER_PARAMETER)))
            .collect::<Result<Vec<_>, _>>()?,
        MixerTemplate::Ring => {
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for i in 0..num_qubits {
                let j = (i + 1) % num_qubits;
                if !pairs.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i)) {
                    pairs.push((i, j));
                }
            }
            pairs
                .into_iter()
                .map(|(i, j)| Gate::rotation(GateKind::RxxPlusRyy, &[i, j], beta()))
                .collect::<Result<Vec<_>, _>>()?
        }
        MixerTemplate::XY => (0..num_qubits)
            .flat_map(|i| (i + 1..num_qubits).map(move |j| (i, j)))
            .map(|(i, j)| Gate::rotation(GateKind::RxxPlusRyy, &[i, j], beta()))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Circuit::new(num_qubits, gates)
}

/// Hardware-efficient ansatz: per layer `ry(θ)` on every qubit followed by the
/// entangler on the chain `(q, q+1)`, then a closing `ry` layer. Parameters
/// are `theta_<layer>_<qubit>`, `(layers + 1) · num_qubits` in total.
pub fn build_ansatz(num_qubits: usize, layers: usize, entangler: Entangler) -> Result<Circuit, CircuitError> {
    if layers == 0 {
        return Err(CircuitError::InvalidArgument("ansatz needs at least one layer".into()));
    }
    if num_qubits == 0 {
        return Err(CircuitError::TooFewQubits { min: 1, got: 0 });
    }
    let mut gates = Vec::new();
    let ry_layer = |l: usize, gates: &mut Vec<Gate>| -> Result<(), CircuitError> {
        for q in 0..num_qubits {
            gates.push(Gate::rotation(
                GateKind::Ry,
                &[q],
                AngleExpr::Symbol(format!("theta_{l}_{q}")),
            )?);
        }
        Ok(())
    };
    for l in 0..layers {
        ry_layer(l, &mut gates)?;
        for q in 0..num_qubits.saturating_sub(1) {
            gates.push(Gate::fixed(entangler.gate(), &[q, q + 1])?);
        }
    }
    ry_layer(layers, &mut gates)?;
    Circuit::new(num_qubits, gates)
}

/// QAOA circuit: `h` on every qubit, then `p` rounds of the cost layer
/// (`rz(2γₖhᵢ)`, `rzz(2γₖJᵢⱼ)`) and the mixer. A single-parameter mixer has
/// its symbol renamed to `beta_k`; with several, each becomes `<name>_k`.
pub fn build_qaoa_circuit(ising: &IsingModel, mixer: &Circuit, p: usize) -> Result<Circuit, CircuitError> {
    let n = ising.num_spins();
    if mixer.num_qubits() != n {
        return Err(CircuitError::SizeMismatch {
            circuit: mixer.num_qubits(),
            model: n,
        });
    }
    if p == 0 {
        return Err(CircuitError::InvalidArgument("QAOA needs p >= 1".into()));
    }
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::fixed(GateKind::H, &[q])).collect::<Result<_, _>>()?;
    let single = mixer.num_parameters() == 1;
    for k in 1..=p {
        let gamma = format!("gamma_{k}");
        for (i, &h) in ising.fields().iter().enumerate() {
            if h != 0.0 {
                gates.push(Gate::rotation(GateKind::Rz, &[i], AngleExpr::scaled(2.0 * h, &gamma))?);
            }
        }
        for ((i, j), c) in ising.couplings() {
            if c != 0.0 {
                gates.push(Gate::rotation(GateKind::Rzz, &[i, j], AngleExpr::scaled(2.0 * c, &gamma))?);
            }
        }
        let layer = mixer.renamed(|s| if single { format!("beta_{k}") } else { format!("{s}_{k}") });
        gates.extend(layer.gates().iter().cloned());
    }
    Circuit::new(n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_mixer_shares_beta() {
        let c = build_mixer(MixerTemplate::X, 3).unwrap();
        assert_eq!(c.count(GateKind::Rx), 3);
        assert_eq!(c.parameters(), &["beta".to_string()]);
        assert!(c.gates().iter().all(|g| g.angle == Some(AngleExpr::scaled(2.0, "beta"))));
    }

    #[test]
    fn ring_and_xy_pairs() {
        let ring = build_mixer(MixerTemplate::Ring, 4).unwrap();
        let pairs: Vec<_> = ring.gates().iter().map(|g| (g.qubits[0], g.qubits[1])).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(build_mixer(MixerTemplate::Ring, 2).unwrap().gates().len(), 1);
        assert_eq!(build_mixer(MixerTemplate::XY, 2).unwrap(), build_mixer(MixerTemplate::Ring, 2).unwrap());
        assert_eq!(build_mixer(MixerTemplate::XY, 4).unwrap().gates().len(), 6);
        assert_eq!(
            build_mixer(MixerTemplate::XY, 1).unwrap_err(),
            CircuitError::TooFewQubits { min: 2, got: 1 }
        );
        assert!(build_mixer(MixerTemplate::X, 0).is_err());
    }

    #[test]
    fn ansatz_parameter_counts() {
        let c = build_ansatz(2, 1, Entangler::Cz).unwrap();
        assert_eq!((c.num_parameters(), c.count(GateKind::Cz)), (4, 1));
        assert_eq!(build_ansatz(4, 2, Entangler::Cx).unwrap().num_parameters(), 12);
        let single = build_ansatz(1, 1, Entangler::Cz).unwrap();
        assert_eq!((single.num_parameters(), single.count(GateKind::Cz)), (2, 0));
        assert!(build_ansatz(2, 0, Entangler::Cz).is_err());
    }

    #[test]
    fn qaoa_single_edge_layout() {
        let mut ising = IsingModel::new(vec![0.0, 0.0], -0.5);
        ising.add_coupling(0, 1, 0.5).unwrap();
        let mixer = build_mixer(MixerTemplate::X, 2).unwrap();
        let c = build_qaoa_circuit(&ising, &mixer, 1).unwrap();
        let expected = vec![
            Gate::fixed(GateKind::H, &[0]).unwrap(),
            Gate::fixed(GateKind::H, &[1]).unwrap(),
            Gate::rotation(GateKind::Rzz, &[0, 1], AngleExpr::scaled(1.0, "gamma_1")).unwrap(),
            Gate::rotation(GateKind::Rx, &[0], AngleExpr::scaled(2.0, "beta_1")).unwrap(),
            Gate::rotation(GateKind::Rx, &[1], AngleExpr::scaled(2.0, "beta_1")).unwrap(),
        ];
        assert_eq!(c.gates(), expected.as_slice());
        assert_eq!(c.parameters(), &["gamma_1".to_string(), "beta_1".to_string()]);
        assert_eq!(build_qaoa_circuit(&ising, &mixer, 2).unwrap().num_parameters(), 4);
        let wide = build_mixer(MixerTemplate::X, 3).unwrap();
        assert_eq!(
            build_qaoa_circuit(&ising, &wide, 1).unwrap_err(),
            CircuitError::SizeMismatch { circuit: 3, model: 2 }
        );
    }
}
