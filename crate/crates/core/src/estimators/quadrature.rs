//! Globally adaptive Gauss-Kronrod (7/15) quadrature with an absolute error
//! target, plus a nested tensor-product driver for low dimensions.

// QUADPACK node and weight tables, kept at their published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], ...)
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

/// Maximum number of subintervals before giving up on the error target.
pub const MAX_INTERVALS: usize = 4000;

/// Initial uniform split; catches peaks narrower than the whole range.
const INITIAL_PIECES: usize = 16;

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Relative accuracy floor: an error estimate below this fraction of the
/// running value is accepted even when it exceeds the absolute target.
pub const RELATIVE_FLOOR: f64 = 1e-14;

/// ∫_a^b f to absolute accuracy `tol` (or [`RELATIVE_FLOOR`] relative, for
/// integrals too large for `tol` to be reachable in double precision).
///
/// Stops at [`MAX_INTERVALS`] subintervals; the returned error estimate then
/// exceeds the target.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    let width = (b - a) / INITIAL_PIECES as f64;
    let mut intervals: Vec<(f64, f64, f64, f64)> = (0..INITIAL_PIECES)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL_PIECES { b } else { lo + width };
            let (v, e) = gk15(&mut f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    let mut evaluations = (15 * INITIAL_PIECES) as u64;
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        let value = intervals.iter().map(|iv| iv.2).sum::<crate::sum::CompensatedSum>().value();
        if total_err <= tol.max(RELATIVE_FLOOR * value.abs()) || intervals.len() >= MAX_INTERVALS {
            return Quadrature { value, error_estimate: total_err, evaluations };
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Integral of `f` over the box `bounds` by nesting [`integrate`] one
/// coordinate at a time. Cost grows exponentially with the dimension.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(f: F, bounds: &[(f64, f64)], tol: f64) -> Quadrature {
    let mut point = Vec::with_capacity(bounds.len());
    let mut evaluations = 0u64;
    let mut error_estimate = 0.0;
    let value = nested(&f, bounds, &mut point, tol, &mut evaluations, &mut error_estimate);
    Quadrature { value, error_estimate, evaluations }
}

fn nested<F: Fn(&[f64]) -> f64>(
    f: &F,
    bounds: &[(f64, f64)],
    point: &mut Vec<f64>,
    tol: f64,
    evaluations: &mut u64,
    error_estimate: &mut f64,
) -> f64 {
    let depth = point.len();
    let (a, b) = bounds[depth];
    if depth + 1 == bounds.len() {
        let q = integrate(
            |x| {
                point.push(x);
                let v = f(point);
                point.pop();
                v
            },
            a,
            b,
            tol,
        );
        *evaluations += q.evaluations;
        if depth == 0 {
            *error_estimate = q.error_estimate;
        }
        return q.value;
    }
    // inner errors integrate over this axis
    let inner_tol = 0.1 * tol / (b - a);
    let q = integrate(
        |x| {
            point.push(x);
            let mut inner_err = 0.0;
            let v = nested(f, bounds, point, inner_tol, evaluations, &mut inner_err);
            point.pop();
            v
        },
        a,
        b,
        0.9 * tol,
    );
    if depth == 0 {
        *error_estimate = q.error_estimate + 0.1 * tol;
    }
    q.value
}
