//! Closed-form coefficient fields, forcing terms and initial data of the four
//! benchmark problems.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::grid::Domain2D;

/// Lower bound enforced on diffusion coefficients while optimizing.
pub const KAPPA_FLOOR: f64 = 1e-4;

/// Constant offset of the heat-equation diffusion coefficient.
pub const HEAT_KAPPA_OFFSET: f64 = 0.1;

/// Gray–Scott initial seed: closed ball of this radius around (0.5, 0.5).
pub const GRAYSCOTT_SEED_RADIUS: f64 = 0.1;

/// `α · exp(−‖(x, y) − c‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBumpParams {
    pub amplitude: f64,
    pub center: (f64, f64),
}

impl GaussianBumpParams {
    pub const fn new(amplitude: f64, cx: f64, cy: f64) -> Self {
        GaussianBumpParams {
            amplitude,
            center: (cx, cy),
        }
    }
}

#[inline]
pub fn gaussian_bump(x: f64, y: f64, p: &GaussianBumpParams) -> f64 {
    let dx = x - p.center.0;
    let dy = y - p.center.1;
    p.amplitude * (-dx * dx - dy * dy).exp()
}

/// Two bumps; vector layout `[α1, c1x, c1y, α2, c2x, c2y]`. Used both for the
/// Helmholtz `(κ, η)` pair and for the heat diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBumpParams {
    pub first: GaussianBumpParams,
    pub second: GaussianBumpParams,
}

pub type HelmholtzParams = TwoBumpParams;
pub type HeatParams = TwoBumpParams;

impl TwoBumpParams {
    pub const NAMES: [&'static str; 6] = ["alpha1", "c1x", "c1y", "alpha2", "c2x", "c2y"];

    pub const fn new(a1: f64, c1: (f64, f64), a2: f64, c2: (f64, f64)) -> Self {
        TwoBumpParams {
            first: GaussianBumpParams::new(a1, c1.0, c1.1),
            second: GaussianBumpParams::new(a2, c2.0, c2.1),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.first.amplitude,
            self.first.center.0,
            self.first.center.1,
            self.second.amplitude,
            self.second.center.0,
            self.second.center.1,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), 6, "two-bump parameters have 6 entries");
        TwoBumpParams::new(v[0], (v[1], v[2]), v[3], (v[4], v[5]))
    }
}

/// Helmholtz diffusion and wave-number coefficients `(κ, η)`.
#[inline]
pub fn helmholtz_coeffs(x: f64, y: f64, p: &HelmholtzParams) -> (f64, f64) {
    (
        gaussian_bump(x, y, &p.first) + 1.0,
        gaussian_bump(x, y, &p.second) + 1.0,
    )
}

/// Ground-truth Helmholtz coefficients.
pub const HELMHOLTZ_TRUTH: HelmholtzParams = TwoBumpParams::new(4.0, (-1.0, -1.0), 1.0, (2.0, 1.0));

/// Forcing that makes `sin(x)·sin(y)` the exact solution of the Helmholtz
/// problem at the ground-truth coefficients.
pub fn helmholtz_forcing(x: f64, y: f64) -> f64 {
    let phi1 = gaussian_bump(x, y, &HELMHOLTZ_TRUTH.first);
    let phi2 = gaussian_bump(x, y, &HELMHOLTZ_TRUTH.second);
    let (sx, cx) = (x.sin(), x.cos());
    let (sy, cy) = (y.sin(), y.cos());
    2.0 * (x + 1.0) * phi1 * cx * sy
        + 2.0 * (y + 1.0) * phi1 * sx * cy
        + ((phi2 + 1.0).powi(2) + 2.0 * (phi1 + 1.0)) * sx * sy
}

#[inline]
pub fn heat_kappa(x: f64, y: f64, p: &HeatParams) -> f64 {
    gaussian_bump(x, y, &p.first) + gaussian_bump(x, y, &p.second) + HEAT_KAPPA_OFFSET
}

pub const HEAT_TRUTH: HeatParams = TwoBumpParams::new(3.0, (-2.0, -2.0), 2.5, (1.0, 1.0));

/// Antisymmetric pair of bumps centred at (1, 1) and (−1, −1).
pub fn heat_initial(x: f64, y: f64) -> f64 {
    (-(x - 1.0).powi(2) - (y - 1.0).powi(2)).exp() - (-(x + 1.0).powi(2) - (y + 1.0).powi(2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayScottParams {
    pub du: f64,
    pub dv: f64,
    pub feed: f64,
    pub kill: f64,
}

pub const GRAYSCOTT_TRUTH: GrayScottParams = GrayScottParams {
    du: 2e-6,
    dv: 0.8e-6,
    feed: 0.018,
    kill: 0.051,
};

/// `u0 = 1` on the closed ball of radius 0.1 around (0.5, 0.5), `v0 = 1 − u0`.
pub fn grayscott_initial(x: f64, y: f64) -> (f64, f64) {
    let (dx, dy) = (x - 0.5, y - 0.5);
    if dx * dx + dy * dy <= GRAYSCOTT_SEED_RADIUS * GRAYSCOTT_SEED_RADIUS {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Darcy permeability `C² + Σ A_ij sin(π(i+1)x/4) sin(π(j+1)y/4)`, vector
/// layout `[C, A11, A12, A13, A21, …, A33]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarcyParams {
    pub c: f64,
    pub a: [[f64; 3]; 3],
}

impl DarcyParams {
    pub const NAMES: [&'static str; 10] = [
        "C", "A11", "A12", "A13", "A21", "A22", "A23", "A31", "A32", "A33",
    ];

    pub fn to_array(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[0] = self.c;
        for (k, v) in self.a.iter().flatten().enumerate() {
            out[k + 1] = *v;
        }
        out
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), 10, "Darcy parameters have 10 entries");
        let mut a = [[0.0; 3]; 3];
        for (k, slot) in a.iter_mut().flatten().enumerate() {
            *slot = v[k + 1];
        }
        DarcyParams { c: v[0], a }
    }
}

pub const DARCY_TRUTH: DarcyParams = DarcyParams {
    c: 0.5,
    a: [[1.0, 2.0, 3.0], [4.0, -1.0, -2.0], [-3.0, -4.0, 5.0]],
};

pub fn darcy_kappa(x: f64, y: f64, p: &DarcyParams) -> f64 {
    let sx = [2.0, 3.0, 4.0].map(|m: f64| (PI * m * x / 4.0).sin());
    let sy = [2.0, 3.0, 4.0].map(|m: f64| (PI * m * y / 4.0).sin());
    let mut k = p.c * p.c;
    for i in 0..3 {
        for j in 0..3 {
            k += p.a[i][j] * sx[i] * sy[j];
        }
    }
    k
}

/// Minimum of `kappa` over the nodes of `domain`.
pub fn min_on_grid(domain: &Domain2D, kappa: impl Fn(f64, f64) -> f64) -> f64 {
    domain
        .nodes()
        .map(|(x, y)| kappa(x, y))
        .fold(f64::INFINITY, f64::min)
}

/// Shrinks the negative amplitudes of a two-bump coefficient toward zero
/// until `offset + bumps ≥ KAPPA_FLOOR` on every node. Returns whether the
/// parameters were changed.
pub(crate) fn project_two_bump(p: &mut TwoBumpParams, offset: f64, domain: &Domain2D) -> bool {
    let kappa = |p: &TwoBumpParams, x: f64, y: f64| {
        gaussian_bump(x, y, &p.first) + gaussian_bump(x, y, &p.second) + offset
    };
    if min_on_grid(domain, |x, y| kappa(p, x, y)) >= KAPPA_FLOOR {
        return false;
    }
    let original = *p;
    let scaled = |s: f64| {
        let mut q = original;
        if q.first.amplitude < 0.0 {
            q.first.amplitude *= s;
        }
        if q.second.amplitude < 0.0 {
            q.second.amplitude *= s;
        }
        q
    };
    *p = shrink_until(
        |s| min_on_grid(domain, |x, y| kappa(&scaled(s), x, y)),
        scaled,
    );
    true
}

/// Largest `s ∈ [0, 1]` (to bisection accuracy) with `min_kappa(s) ≥ floor`,
/// assuming `min_kappa(0) ≥ floor`.
fn shrink_until<T>(min_kappa: impl Fn(f64) -> f64, build: impl Fn(f64) -> T) -> T {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if min_kappa(mid) >= KAPPA_FLOOR {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn bump_peak_and_zero_amplitude() {
        let p = GaussianBumpParams::new(4.0, -1.0, -1.0);
        assert_eq!(gaussian_bump(-1.0, -1.0, &p), 4.0);
        let z = GaussianBumpParams::new(0.0, 0.3, 0.1);
        assert_eq!(gaussian_bump(1.7, -2.0, &z), 0.0);
        // 4·e^{-2}, evaluated as a power series to 30 terms.
        let e_m2: f64 = (0..30)
            .scan(1.0, |term, n| {
                let t = *term;
                *term *= -2.0 / (n as f64 + 1.0);
                Some(t)
            })
            .sum();
        assert_abs_diff_eq!(gaussian_bump(0.0, 0.0, &p), 4.0 * e_m2, epsilon = 1e-14);
        assert_abs_diff_eq!(gaussian_bump(0.0, 0.0, &p), 0.541341, epsilon = 5e-7);
    }

    #[test]
    fn bump_decays_along_rays() {
        let p = GaussianBumpParams::new(2.0, 0.5, -0.3);
        for &(dx, dy) in &[(1.0, 0.0), (0.6, 0.8), (-0.3, 0.2)] {
            let mut prev = f64::INFINITY;
            for k in 0..50 {
                let r = k as f64 * 0.1;
                let v = gaussian_bump(0.5 + r * dx, -0.3 + r * dy, &p);
                assert!(v < prev || (v == 0.0 && prev == 0.0));
                prev = v;
            }
        }
    }

    #[test]
    fn helmholtz_coefficient_values() {
        let zero = TwoBumpParams::new(0.0, (1.0, 2.0), 0.0, (0.0, 0.0));
        assert_eq!(helmholtz_coeffs(0.4, -1.2, &zero), (1.0, 1.0));
        assert_eq!(helmholtz_coeffs(-1.0, -1.0, &HELMHOLTZ_TRUTH).0, 5.0);
        assert_eq!(helmholtz_coeffs(2.0, 1.0, &HELMHOLTZ_TRUTH).1, 2.0);
    }

    #[test]
    fn helmholtz_forcing_values() {
        assert_eq!(helmholtz_forcing(0.0, 0.0), 0.0);
        // At (π/2, π/2) the cosine terms vanish, leaving the bracket times 1.
        let (x, y) = (PI / 2.0, PI / 2.0);
        let d1 = (x + 1.0).powi(2) + (y + 1.0).powi(2);
        let d2 = (x - 2.0).powi(2) + (y - 1.0).powi(2);
        let phi1 = 4.0 * (-d1).exp();
        let phi2 = (-d2).exp();
        let expected = (phi2 + 1.0).powi(2) + 2.0 * (phi1 + 1.0);
        assert_relative_eq!(helmholtz_forcing(x, y), expected, max_relative = 1e-14);
    }

    #[test]
    fn helmholtz_forcing_matches_continuous_operator() {
        // −∇·(κ∇u) + η²u for u = sin x sin y, with derivatives taken by
        // fourth-order central differences of the flux.
        let h = 1e-3;
        let kappa = |x: f64, y: f64| helmholtz_coeffs(x, y, &HELMHOLTZ_TRUTH).0;
        let eta = |x: f64, y: f64| helmholtz_coeffs(x, y, &HELMHOLTZ_TRUTH).1;
        let u = |x: f64, y: f64| x.sin() * y.sin();
        let d1 = |f: &dyn Fn(f64) -> f64, s: f64| {
            (-f(s + 2.0 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2.0 * h)) / (12.0 * h)
        };
        let points = [
            (0.3, -1.1),
            (-2.5, 0.7),
            (1.9, 2.2),
            (-0.4, -0.9),
            (2.8, -2.6),
            (0.0, 1.0),
            (-1.0, -1.0),
            (1.4, 0.2),
            (-3.0, 3.0),
            (2.0, 1.0),
        ];
        for &(x, y) in &points {
            let flux_x = |s: f64| kappa(s, y) * d1(&|r| u(r, y), s);
            let flux_y = |s: f64| kappa(x, s) * d1(&|r| u(x, r), s);
            let div = d1(&flux_x, x) + d1(&flux_y, y);
            let residual = -div + eta(x, y).powi(2) * u(x, y);
            assert_abs_diff_eq!(residual, helmholtz_forcing(x, y), epsilon = 1e-7);
        }
    }

    #[test]
    fn heat_kappa_values() {
        let zero = TwoBumpParams::new(0.0, (0.0, 0.0), 0.0, (1.0, 1.0));
        assert_eq!(heat_kappa(0.2, 2.0, &zero), 0.1);
        // 3 + 2.5·e^{-18} + 0.1; e^{-18} from its power series at high
        // precision via e^{-18} = (e^{-1})^18.
        let e_m1: f64 = (0..25)
            .scan(1.0, |term, n| {
                let t = *term;
                *term *= -1.0 / (n as f64 + 1.0);
                Some(t)
            })
            .sum();
        let expected = 3.0 + 2.5 * e_m1.powi(18) + 0.1;
        assert_relative_eq!(
            heat_kappa(-2.0, -2.0, &HEAT_TRUTH),
            expected,
            max_relative = 1e-14
        );
        assert_abs_diff_eq!(
            heat_kappa(-2.0, -2.0, &HEAT_TRUTH),
            3.100000038,
            epsilon = 1e-9
        );

        let probe = Domain2D::square(-PI, PI, 100).unwrap();
        assert!(min_on_grid(&probe, |x, y| heat_kappa(x, y, &HEAT_TRUTH)) > 0.0);
    }

    #[test]
    fn darcy_kappa_values() {
        let flat = DarcyParams {
            c: 0.7,
            a: [[0.0; 3]; 3],
        };
        assert_abs_diff_eq!(darcy_kappa(1.3, -2.1, &flat), 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(darcy_kappa(0.0, 0.0, &DARCY_TRUTH), 0.25, epsilon = 1e-15);
        for &(x, y) in &[(4.0, 1.3), (-4.0, -0.7), (0.0, 2.2)] {
            assert_abs_diff_eq!(darcy_kappa(x, y, &DARCY_TRUTH), 0.25, epsilon = 1e-12);
        }

        let mut sum = 0.25;
        for i in 1..=3 {
            for j in 1..=3 {
                let a = DARCY_TRUTH.a[i - 1][j - 1];
                sum += a * (PI * (i + 1) as f64 / 4.0).sin() * (PI * (j + 1) as f64 / 4.0).sin();
            }
        }
        assert_abs_diff_eq!(darcy_kappa(1.0, 1.0, &DARCY_TRUTH), sum, epsilon = 1e-14);
        let round = DarcyParams::from_slice(&DARCY_TRUTH.to_array());
        assert_eq!(round, DARCY_TRUTH);
    }

    #[test]
    fn initial_data() {
        assert_eq!(grayscott_initial(0.5, 0.5), (1.0, 0.0));
        assert_eq!(grayscott_initial(0.0, 0.0), (0.0, 1.0));
        assert_eq!(grayscott_initial(0.5 + 0.1, 0.5), (1.0, 0.0));

        assert_eq!(heat_initial(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(
            heat_initial(1.0, 1.0),
            1.0 - (-8.0f64).exp(),
            epsilon = 1e-15
        );
        for &(x, y) in &[(0.3, 0.7), (-2.0, 1.1), (2.9, -0.4)] {
            assert_abs_diff_eq!(heat_initial(x, y), -heat_initial(-x, -y), epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_restores_floor() {
        let d = Domain2D::square(-PI, PI, 18).unwrap();
        let mut p = TwoBumpParams::new(-3.0, (0.0, 0.0), 1.0, (1.0, 1.0));
        assert!(project_two_bump(&mut p, HEAT_KAPPA_OFFSET, &d));
        let m = min_on_grid(&d, |x, y| heat_kappa(x, y, &p));
        assert!((KAPPA_FLOOR..1e-3).contains(&m), "min κ {m}");
        assert_eq!(p.second.amplitude, 1.0);

        let mut ok = HEAT_TRUTH;
        assert!(!project_two_bump(&mut ok, HEAT_KAPPA_OFFSET, &d));
        assert_eq!(ok, HEAT_TRUTH);
    }
}
