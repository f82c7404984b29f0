use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    /// `0` means `200 · dim`.
    pub maxiter: usize,
    pub xtol: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            maxiter: 0,
            xtol: 1e-6,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaOptions {
    pub maxiter: usize,
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaOptions {
    fn default() -> Self {
        Self {
            maxiter: 200,
            a: 0.1,
            c: 0.1,
            alpha: 0.602,
            gamma: 0.101,
        }
    }
}

/// A configured classical optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum OptimizerSpec {
    NelderMead(NelderMeadOptions),
    #[serde(rename = "SPSA")]
    Spsa(SpsaOptions),
}

impl OptimizerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::NelderMead(_) => "NelderMead",
            OptimizerSpec::Spsa(_) => "SPSA",
        }
    }

    pub fn minimize(&self, f: impl FnMut(&[f64]) -> f64, x0: &[f64], seed: u64) -> Optimization {
        match self {
            OptimizerSpec::NelderMead(o) => nelder_mead(f, x0, o),
            OptimizerSpec::Spsa(o) => spsa(f, x0, o, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    pub x: Vec<f64>,
    pub fun: f64,
    /// Every objective evaluation in call order.
    pub evaluations: Vec<(Vec<f64>, f64)>,
    pub iterations: usize,
}

struct Recorder<F> {
    f: F,
    evaluations: Vec<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Recorder<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        self.evaluations.push((x.to_vec(), v));
        v
    }

    fn finish(self, iterations: usize) -> Optimization {
        let (x, fun) = self
            .evaluations
            .iter()
            .fold(None::<&(Vec<f64>, f64)>, |best, e| match best {
                Some(b) if b.1 <= e.1 => Some(b),
                _ => Some(e),
            })
            .cloned()
            .unwrap_or_default();
        Optimization {
            x,
            fun,
            evaluations: self.evaluations,
            iterations,
        }
    }
}

/// Nelder–Mead with reflection 1, expansion 2, contraction 0.5 and shrink
/// 0.5. Stops when every vertex lies within `xtol` of the best one (max
/// norm) or after `maxiter` iterations.
pub fn nelder_mead(f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Optimization {
    let dim = x0.len();
    let maxiter = if opts.maxiter == 0 { 200 * dim.max(1) } else { opts.maxiter };
    let mut rec = Recorder { f, evaluations: Vec::new() };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = rec.call(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = rec.call(&x);
        simplex.push((x, v));
    }
    if dim == 0 {
        return rec.finish(0);
    }
    let affine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };

    let mut iterations = 0;
    while iterations < maxiter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < opts.xtol {
            break;
        }
        iterations += 1;
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        // Reflection: centroid + (centroid − worst).
        let xr = affine(&centroid, &worst.0, -1.0);
        let fr = rec.call(&xr);
        if fr < simplex[0].1 {
            let xe = affine(&centroid, &worst.0, -2.0);
            let fe = rec.call(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let outside = fr < worst.1;
        let xc = if outside { affine(&centroid, &xr, 0.5) } else { affine(&centroid, &worst.0, 0.5) };
        let fc = rec.call(&xc);
        if (outside && fc <= fr) || (!outside && fc <= worst.1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = affine(&x_best, &vertex.0, 0.5);
            let v = rec.call(&x);
            *vertex = (x, v);
        }
    }
    rec.finish(iterations)
}

/// SPSA: `x ← x − aₖ ĝ`, with `ĝ = (f(x + cₖΔ) − f(x − cₖΔ)) / (2cₖ) · Δ⁻¹`,
/// `Δ ∈ {±1}ᵈ`, `aₖ = a/(k+1)^α`, `cₖ = c/(k+1)^γ`. Returns the best
/// evaluated point.
pub fn spsa(f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &SpsaOptions, seed: u64) -> Optimization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder { f, evaluations: Vec::new() };
    rec.call(x0);
    let mut x = x0.to_vec();
    for k in 0..opts.maxiter {
        let kk = (k + 1) as f64;
        let ak = opts.a / kk.powf(opts.alpha);
        let ck = opts.c / kk.powf(opts.gamma);
        let delta: Vec<f64> = x.iter().map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
        let diff = rec.call(&plus) - rec.call(&minus);
        for (v, d) in x.iter_mut().zip(&delta) {
            *v -= ak * diff / (2.0 * ck * d);
        }
    }
    rec.finish(opts.maxiter)
}
