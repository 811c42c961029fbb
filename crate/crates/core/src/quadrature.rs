//! Adaptive Gauss–Kronrod (7/15) quadrature, with a tensorized 2-D variant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut k = T::zero();
    let mut g = T::zero();
    for i in 0..7 {
        let dx = half * T::lit(XGK[i]);
        let s = f(mid - dx) + f(mid + dx);
        k += T::lit(WGK[i]) * s;
        if i % 2 == 1 {
            g += T::lit(WG[i / 2]) * s;
        }
    }
    let fc = f(mid);
    k += T::lit(WGK[7]) * fc;
    g += T::lit(WG[3]) * fc;
    (k * half, ((k - g) * half).abs())
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Integrates `f` over `[a, b]` split at `breaks`, refining the worst
/// segment until `error <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    breaks: &[T],
    rel_tol: T,
    abs_tol: T,
) -> Result<Quadrature<T>> {
    let mut cuts = vec![a];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.extend(inner);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = kronrod(&mut f, w[0], w[1]);
        evaluations += 15;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonIntegrable(format!("non-finite quadrature sum {value}")));
        }
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error, evaluations });
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::NumericalInstability(format!(
                "quadrature did not converge: value {value}, error {error}, target {target}"
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Segment { error: T::zero(), ..worst });
            continue;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod(&mut f, a, b);
            evaluations += 15;
            heap.push(Segment { a, b, value, error });
        }
    }
}

/// Iterated 2-D integral over `[ax,bx] × [ay,by]`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_2d<T: Real, F: FnMut(T, T) -> T>(
    mut f: F,
    (ax, bx): (T, T),
    (ay, by): (T, T),
    breaks_x: &[T],
    breaks_y: &[T],
    rel_tol: T,
    abs_tol: T,
) -> Result<Quadrature<T>> {
    let mut evaluations = 0;
    let mut inner_err: Option<Error> = None;
    let inner_tol = rel_tol * T::lit(0.1);
    let outer = integrate(
        |x| {
            if inner_err.is_some() {
                return T::zero();
            }
            match integrate(|y| f(x, y), ay, by, breaks_y, inner_tol, abs_tol * T::lit(0.1)) {
                Ok(q) => {
                    evaluations += q.evaluations;
                    q.value
                }
                Err(e) => {
                    inner_err = Some(e);
                    T::zero()
                }
            }
        },
        ax,
        bx,
        breaks_x,
        rel_tol,
        abs_tol,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(Quadrature { evaluations, ..outer })
}
