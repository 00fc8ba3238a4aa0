//! Globally adaptive Gauss–Kronrod (7/15) quadrature with infinite-range
//! substitutions.

use crate::error::{Error, Result};

const MAX_SUBDIVISIONS: usize = 4000;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// 7-point Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a successful quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kron.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = kron * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if roundoff > f64::MIN_POSITIVE {
        error = error.max(roundoff);
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

fn adaptive_finite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> Result<Quadrature> {
    let mut segments = vec![kronrod(f, lo, hi)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let roundoff_floor = 100.0 * f64::EPSILON * segments.iter().map(|s| s.value.abs()).sum::<f64>();
        if error <= rel_tol * value.abs() || error <= roundoff_floor || error == 0.0 {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if !value.is_finite() || segments.len() >= MAX_SUBDIVISIONS {
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
            });
        }
        segments.push(kronrod(f, seg.lo, mid));
        segments.push(kronrod(f, mid, seg.hi));
        evaluations += 30;
    }
}

/// Adaptive quadrature of `f` over `[lo, hi]` to relative tolerance `rel_tol`.
///
/// Either endpoint may be infinite; half-lines are mapped onto `[0, 1)` by
/// `t = a + s/(1-s)` and the full line onto `(-1, 1)` by `t = s/(1-s^2)`.
/// Kronrod nodes are interior, so the mapped endpoints are never evaluated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<Quadrature> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidArgument("NaN integration limit".into()));
    }
    if lo == hi {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if lo > hi {
        return integrate(f, hi, lo, rel_tol).map(|q| Quadrature {
            value: -q.value,
            ..q
        });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive_finite(&f, lo, hi, rel_tol),
        (true, false) => {
            let g = |s: f64| {
                let d = 1.0 - s;
                f(lo + s / d) / (d * d)
            };
            adaptive_finite(&g, 0.0, 1.0, rel_tol)
        }
        (false, true) => {
            let g = |s: f64| {
                let d = 1.0 - s;
                f(hi - s / d) / (d * d)
            };
            adaptive_finite(&g, 0.0, 1.0, rel_tol)
        }
        (false, false) => {
            let g = |s: f64| {
                let d = 1.0 - s * s;
                f(s / d) * (1.0 + s * s) / (d * d)
            };
            adaptive_finite(&g, -1.0, 1.0, rel_tol)
        }
    }
}

/// Adaptive quadrature split at interior `breakpoints` (e.g. kinks or
/// jumps of the integrand). Breakpoints outside `(lo, hi)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    rel_tol: f64,
) -> Result<Quadrature> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in edges.windows(2) {
        let q = integrate(&f, w[0], w[1], rel_tol)?;
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
    }
    Ok(total)
}
