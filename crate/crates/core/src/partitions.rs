//! Set partitions of `{1..p}` and their Vandermonde coefficients.
//!
//! The coefficient `v(ω)` of a partition is the leading coefficient of the
//! lattice count
//!
//! ```text
//! N_ω(n) = #{ t ∈ {0..n-1}^p : Σ_{i: ω_i = b} t_i = Σ_{i: ω_{i+1} = b} t_i  for every block b }
//! ```
//!
//! in `n^(p-k+1)`. Each `t_i` acts as a flow on the edge `ω_{i+1} → ω_i` of a
//! directed multigraph on the blocks, so the constraints are flow
//! conservation. The constraint matrix is totally unimodular and `N_ω` is an
//! honest polynomial in `n`, which lets us recover it exactly from a handful of
//! counts with rational finite differences.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// Largest ground-set size supported by enumeration and counting.
pub const P_MAX: usize = 7;

/// First bandwidth used by the polynomial fit of the lattice count.
pub const FIT_START: u64 = 8;

/// A partition of `{1..p}`, stored as canonical block labels.
///
/// Labels are zero-based internally; `labels()[i]` is the block holding
/// element `i + 1`. The first occurrence of block `j` precedes that of
/// block `j + 1`, so structural equality is partition equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    labels: Vec<u8>,
    blocks: usize,
}

impl SetPartition {
    /// Builds a partition from any labeling, relabelling by first occurrence.
    pub fn from_labels<L: Copy + Eq>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("partition of the empty set"));
        }
        if labels.len() > u8::MAX as usize {
            return Err(invalid("partition too large"));
        }
        let mut seen: Vec<L> = Vec::new();
        let mut canon = Vec::with_capacity(labels.len());
        for &l in labels {
            let idx = match seen.iter().position(|&s| s == l) {
                Some(i) => i,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            };
            canon.push(idx as u8);
        }
        Ok(Self {
            labels: canon,
            blocks: seen.len(),
        })
    }

    /// Builds a partition from explicit blocks of one-based elements,
    /// e.g. `[[1, 3], [2, 4]]`.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let p: usize = blocks.iter().map(Vec::len).sum();
        let mut labels = vec![usize::MAX; p];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e == 0 || e > p || labels[e - 1] != usize::MAX {
                    return Err(invalid(format!("blocks do not partition 1..{p}")));
                }
                labels[e - 1] = b;
            }
        }
        Self::from_labels(&labels)
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.blocks
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Blocks as sorted one-based element lists, in canonical order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (i, &b) in self.labels.iter().enumerate() {
            out[b as usize].push(i + 1);
        }
        out
    }

    /// The partition whose label sequence is this one rotated left by `shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let p = self.p();
        let rot: Vec<u8> = (0..p).map(|i| self.labels[(i + shift) % p]).collect();
        Self::from_labels(&rot).expect("non-empty")
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.blocks() {
            let items: Vec<String> = block.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 || p > P_MAX {
        return Err(invalid(format!("p must lie in 1..={P_MAX}, got {p}")));
    }
    Ok(())
}

/// All partitions of `{1..p}`, optionally restricted to `k` blocks, in
/// lexicographic order of their restricted-growth label strings.
pub fn enumerate_partitions(p: usize, k: Option<usize>) -> Result<Vec<SetPartition>> {
    check_p(p)?;
    if let Some(k) = k {
        if k == 0 || k > p {
            return Err(invalid(format!("k must lie in 1..={p}, got {k}")));
        }
    }
    let mut out = Vec::new();
    let mut labels = vec![0u8; p];
    // maxes[i] = largest label among labels[..=i]
    let mut maxes = vec![0u8; p];
    loop {
        let blocks = maxes[p - 1] as usize + 1;
        if k.is_none_or(|k| k == blocks) {
            out.push(SetPartition {
                labels: labels.clone(),
                blocks,
            });
        }
        // next restricted growth string
        let mut i = p - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if labels[i] <= maxes[i - 1] {
                labels[i] += 1;
                maxes[i] = maxes[i - 1].max(labels[i]);
                for j in i + 1..p {
                    labels[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// True iff no `a < b < c < d` has `ω_a = ω_c ≠ ω_b = ω_d`.
pub fn is_noncrossing(w: &SetPartition) -> bool {
    let l = &w.labels;
    let p = l.len();
    for a in 0..p {
        for b in a + 1..p {
            if l[b] == l[a] {
                continue;
            }
            for c in b + 1..p {
                if l[c] != l[a] {
                    continue;
                }
                if l[c + 1..].iter().any(|&x| x == l[b]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Counts `t ∈ {0..n-1}^p` satisfying the cyclic flow constraints of `w`.
pub fn lattice_count(w: &SetPartition, n: u64) -> Result<u128> {
    if n == 0 {
        return Err(invalid("lattice count needs n >= 1"));
    }
    let p = w.p();
    let k = w.k();
    let next = |i: usize| w.labels[(i + 1) % p] as usize;

    // Elements whose edge is a self-loop contribute a free factor n.
    let mut free = 0u32;
    let mut last_touch = vec![0usize; k];
    for i in 0..p {
        let (a, b) = (w.labels[i] as usize, next(i));
        if a == b {
            free += 1;
        }
        last_touch[a] = last_touch[a].max(i);
        last_touch[b] = last_touch[b].max(i);
    }

    let mut states: HashMap<Vec<i64>, u128> = HashMap::new();
    states.insert(vec![0; k], 1);
    for i in 0..p {
        let (a, b) = (w.labels[i] as usize, next(i));
        if a != b {
            let mut next_states: HashMap<Vec<i64>, u128> = HashMap::with_capacity(states.len() * 2);
            for (state, count) in &states {
                for t in 0..n as i64 {
                    let mut s = state.clone();
                    s[a] += t;
                    s[b] -= t;
                    let slot = next_states.entry(s).or_insert(0);
                    *slot = slot
                        .checked_add(*count)
                        .ok_or_else(|| Error::Overflow("accumulating lattice counts".into()))?;
                }
            }
            states = next_states;
        }
        // blocks untouched after i must now balance
        let closing: Vec<usize> = (0..k).filter(|&b| last_touch[b] == i).collect();
        if !closing.is_empty() {
            states.retain(|s, _| closing.iter().all(|&b| s[b] == 0));
        }
    }

    let mut total: u128 = 0;
    for c in states.values() {
        total = total
            .checked_add(*c)
            .ok_or_else(|| Error::Overflow("summing lattice counts".into()))?;
    }
    let scale = (n as u128)
        .checked_pow(free)
        .ok_or_else(|| Error::Overflow("raising n to the free-edge count".into()))?;
    total
        .checked_mul(scale)
        .ok_or_else(|| Error::Overflow("scaling by free edges".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientMethod {
    /// `v = 1` for noncrossing partitions; falls back to counting otherwise.
    NoncrossingShortcut,
    /// Always fit the lattice count polynomial.
    ExtrapolatedCount,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionCoefficient {
    pub partition: SetPartition,
    pub value: BigRational,
    /// True when the value is exact: from the noncrossing rule or a validated rational fit.
    pub exact: bool,
}

impl PartitionCoefficient {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Leading coefficient of a polynomial sampled at `start, start+step, ...`.
///
/// `samples` must hold `degree + 2` values; the extra one validates the fit by
/// requiring the `(degree+1)`-th finite difference to vanish.
fn leading_coefficient(samples: &[BigInt], degree: usize, step: u64) -> Option<BigRational> {
    debug_assert_eq!(samples.len(), degree + 2);
    let mut diffs: Vec<BigInt> = samples.to_vec();
    let mut table = vec![diffs.clone()];
    for _ in 0..=degree {
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        table.push(diffs.clone());
    }
    if table[degree + 1].iter().any(|x| !x.is_zero()) {
        return None;
    }
    // Δ_h^D P = c · D! · h^D
    let denom: BigInt = (1..=degree as u64).map(|j| BigInt::from(j * step)).product();
    Some(BigRational::new(table[degree][0].clone(), denom))
}

fn fit_counts(w: &SetPartition, degree: usize, step: u64) -> Result<Option<BigRational>> {
    let mut samples = Vec::with_capacity(degree + 2);
    for j in 0..(degree + 2) as u64 {
        let n = FIT_START + j * step;
        samples.push(BigInt::from(lattice_count(w, n)?));
    }
    Ok(leading_coefficient(&samples, degree, step))
}

/// `v(ω) = lim_n N_ω(n) / n^(p-k+1)`.
pub fn vandermonde_coefficient(w: &SetPartition, method: CoefficientMethod) -> Result<PartitionCoefficient> {
    check_p(w.p())?;
    if method == CoefficientMethod::NoncrossingShortcut && is_noncrossing(w) {
        return Ok(PartitionCoefficient {
            partition: w.clone(),
            value: BigRational::one(),
            exact: true,
        });
    }
    let degree = w.p() - w.k() + 1;
    let value = match fit_counts(w, degree, 1)? {
        Some(v) => v,
        // quasi-polynomial fallback on even n
        None => fit_counts(w, degree, 2)?.ok_or_else(|| {
            Error::NumericalInstability(format!("lattice counts of {w} are not polynomial in n"))
        })?,
    };
    if !value.is_positive() || value > BigRational::one() {
        return Err(Error::NumericalInstability(format!(
            "coefficient of {w} left (0,1]: {value}"
        )));
    }
    Ok(PartitionCoefficient {
        partition: w.clone(),
        value,
        exact: true,
    })
}

static COEFFICIENTS: [OnceLock<Vec<PartitionCoefficient>>; P_MAX + 1] = [const { OnceLock::new() }; P_MAX + 1];

/// Cached coefficients of every partition of `{1..p}`, computed once per process.
pub fn coefficients(p: usize) -> Result<&'static [PartitionCoefficient]> {
    check_p(p)?;
    if let Some(c) = COEFFICIENTS[p].get() {
        return Ok(c);
    }
    let computed = enumerate_partitions(p, None)?
        .iter()
        .map(|w| vandermonde_coefficient(w, CoefficientMethod::NoncrossingShortcut))
        .collect::<Result<Vec<_>>>()?;
    Ok(COEFFICIENTS[p].get_or_init(|| computed))
}

/// `Σ_{ω ∈ Ω_{p,k}} v(ω)^d` for `k = 1..=p`, index `k - 1`.
pub fn coefficient_power_sums(p: usize, d: usize) -> Result<Vec<BigRational>> {
    let mut sums = vec![BigRational::zero(); p];
    for c in coefficients(p)? {
        let mut term = BigRational::one();
        for _ in 0..d {
            term *= &c.value;
        }
        sums[c.partition.k() - 1] += term;
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn part(blocks: &[&[usize]]) -> SetPartition {
        SetPartition::from_blocks(&blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn enumerate_small() {
        let one = enumerate_partitions(1, None).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].to_string(), "{1}");
        assert_eq!(enumerate_partitions(4, Some(2)).unwrap().len(), 7);
        assert_eq!(enumerate_partitions(4, None).unwrap().len(), 15);
    }

    #[test]
    fn enumerate_rejects_bad_sizes() {
        assert!(enumerate_partitions(0, None).is_err());
        assert!(enumerate_partitions(P_MAX + 1, None).is_err());
        assert!(enumerate_partitions(3, Some(4)).is_err());
        assert!(enumerate_partitions(3, Some(0)).is_err());
    }

    #[test]
    fn canonical_labels() {
        let w = SetPartition::from_labels(&[7, 3, 7, 3]).unwrap();
        assert_eq!(w.labels(), &[0, 1, 0, 1]);
        assert_eq!(w.to_string(), "{1,3}{2,4}");
        assert_eq!(w, part(&[&[2, 4], &[1, 3]]));
        assert!(SetPartition::from_blocks(&[vec![1, 1]]).is_err());
    }

    #[test]
    fn noncrossing_examples() {
        assert!(is_noncrossing(&part(&[&[1], &[2], &[3]])));
        assert!(!is_noncrossing(&part(&[&[1, 3], &[2, 4]])));
        assert!(is_noncrossing(&part(&[&[1, 4], &[2, 3]])));
    }

    #[test]
    fn lattice_count_examples() {
        assert_eq!(lattice_count(&part(&[&[1, 2]]), 5).unwrap(), 25);
        assert_eq!(lattice_count(&part(&[&[1], &[2]]), 5).unwrap(), 5);
        assert_eq!(lattice_count(&part(&[&[1, 3], &[2, 4]]), 5).unwrap(), 85);
        assert!(lattice_count(&part(&[&[1]]), 0).is_err());
    }

    #[test]
    fn crossing_count_matches_closed_form() {
        // (2n^3 + n) / 3
        let w = part(&[&[1, 3], &[2, 4]]);
        for n in 1..12u64 {
            let n128 = n as u128;
            assert_eq!(lattice_count(&w, n).unwrap(), (2 * n128.pow(3) + n128) / 3);
        }
    }

    #[test]
    fn coefficient_examples() {
        use CoefficientMethod::*;
        let singletons = part(&[&[1], &[2], &[3]]);
        let full = part(&[&[1, 2, 3, 4]]);
        let crossing = part(&[&[1, 3], &[2, 4]]);
        for m in [NoncrossingShortcut, ExtrapolatedCount] {
            assert_eq!(vandermonde_coefficient(&singletons, m).unwrap().value, ratio(1, 1));
            assert_eq!(vandermonde_coefficient(&full, m).unwrap().value, ratio(1, 1));
            let c = vandermonde_coefficient(&crossing, m).unwrap();
            assert_eq!(c.value, ratio(2, 3));
            assert!(c.exact);
        }
    }

    #[test]
    fn leading_coefficient_detects_non_polynomial() {
        let samples: Vec<BigInt> = [1, 2, 4, 8].iter().map(|&x| BigInt::from(x)).collect();
        assert!(leading_coefficient(&samples, 2, 1).is_none());
        let squares: Vec<BigInt> = (3..6).map(|x: i64| BigInt::from(x * x)).collect();
        assert_eq!(leading_coefficient(&squares, 1, 1), None);
        let cubes: Vec<BigInt> = (3..8).map(|x: i64| BigInt::from(2 * x * x * x)).collect();
        assert_eq!(leading_coefficient(&cubes, 3, 1), Some(ratio(2, 1)));
    }

    #[test]
    fn power_sums_p4() {
        let s1 = coefficient_power_sums(4, 1).unwrap();
        assert_eq!(s1, vec![ratio(1, 1), ratio(20, 3), ratio(6, 1), ratio(1, 1)]);
        let s2 = coefficient_power_sums(4, 2).unwrap();
        assert_eq!(s2[1], ratio(58, 9));
    }
}
