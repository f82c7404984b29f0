use std::collections::BTreeMap;

use super::{BitRange, DecodingMap, EncodingError, EncodingScheme, OffsetContribution, QuboModel};
use crate::problems::{DiscreteProblem, Indicator};

/// Multilinear polynomial over bits: sorted bit set → coefficient.
type Poly = BTreeMap<Vec<usize>, f64>;

fn bits_needed(domain: usize) -> usize {
    (usize::BITS - (domain - 1).leading_zeros()) as usize
}

/// Indicator `[var = value]` as a multilinear polynomial in the variable's
/// code bits (bit `j` of the code at `start + j`), including clamped codes.
fn indicator_poly(start: usize, width: usize, domain: usize, value: usize) -> Poly {
    let decode = |code: usize| code.min(domain - 1);
    let mut poly = Poly::new();
    // Möbius inversion over subsets of the code bits.
    for subset in 0usize..1 << width {
        let mut coef = 0.0;
        let mut t = subset;
        loop {
            let sign = if (subset.count_ones() - t.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            if decode(t) == value {
                coef += sign;
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & subset;
        }
        if coef != 0.0 {
            let key = (0..width).filter(|j| subset >> j & 1 == 1).map(|j| start + j).collect();
            poly.insert(key, coef);
        }
    }
    poly
}

fn multiply(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let mut key: Vec<usize> = ka.iter().chain(kb).copied().collect();
            key.sort_unstable();
            key.dedup();
            *out.entry(key).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// `⌈log₂ d⌉` bits per variable; codes at or above `d` decode to `d − 1`.
///
/// Only constraint groups that restate a variable's own domain are accepted,
/// and every objective term must expand to degree ≤ 2 in the bits.
pub fn binary_encode(dp: &DiscreteProblem) -> Result<(QuboModel, DecodingMap), EncodingError> {
    dp.validate()?;
    let trivial_group = |g: &crate::problems::ExactlyOne| {
        let var = g.members[0].var;
        let mut values: Vec<usize> = g.members.iter().filter(|m| m.var == var).map(|m| m.value).collect();
        values.sort_unstable();
        values.dedup();
        g.members.iter().all(|m| m.var == var) && values.len() == dp.variables[var].domain_size
    };
    if !dp.constraints.iter().all(trivial_group) {
        return Err(EncodingError::UnsupportedConstraints);
    }

    let mut ranges = Vec::with_capacity(dp.variables.len());
    let mut width = 0;
    for v in &dp.variables {
        let w = bits_needed(v.domain_size);
        ranges.push(BitRange {
            variable: v.name.clone(),
            start: width,
            width: w,
            domain_size: v.domain_size,
        });
        width += w;
    }
    let ind = |i: &Indicator| {
        let r = &ranges[i.var];
        indicator_poly(r.start, r.width, r.domain_size, i.value)
    };

    let mut total = Poly::new();
    for term in &dp.objective {
        let poly = match term.factors.as_slice() {
            [] => Poly::from([(Vec::new(), 1.0)]),
            [a] => ind(a),
            [a, b] => multiply(&ind(a), &ind(b)),
            _ => unreachable!("validated degree"),
        };
        for (k, c) in poly {
            *total.entry(k).or_insert(0.0) += term.coefficient * c;
        }
    }

    let mut q = QuboModel::new(width);
    let mut constant = 0.0;
    for (key, c) in total.into_iter().filter(|(_, c)| *c != 0.0) {
        match key.as_slice() {
            [] => constant += c,
            [a] => q.add_linear(*a, c),
            [a, b] => q.add_quadratic(*a, *b, c),
            longer => return Err(EncodingError::DegreeOverflow(longer.len())),
        }
    }
    q.add_offset(constant);
    let offset_contributions = if constant != 0.0 {
        vec![OffsetContribution::new("objective_constant", constant)]
    } else {
        Vec::new()
    };
    let map = DecodingMap {
        scheme: EncodingScheme::Binary,
        ranges,
        fixed: Vec::new(),
        offset_contributions,
        distinct_values: false,
    };
    Ok((q, map))
}
