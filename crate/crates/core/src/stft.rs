//! Short-time Fourier transform with the fixed normalized Gaussian window.
//!
//! The phase convention is V_phi g(x, y) = int g(t) conj(phi(t - x)) e^{-2 pi i y t} dt;
//! the covariance phase factors depend on it. Evaluation is direct
//! quadrature per phase-space node, parallel over grid columns.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::signal::{gaussian_normalizer, make_preset, translate_modulate, Preset, SampledSignal, TimeGrid, WeightExponent};
use crate::tolerances::{COVARIANCE_TOL, STFT_WINDOW_MARGIN, WEIGHTED_TAIL_FRACTION};

/// A point (x, y) of the time-frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PhasePoint { x, y }
    }
}

/// Closed range [lo, hi] discretized with a positive step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid("step", "must be positive and finite"));
        }
        if !(hi >= lo) {
            return Err(Error::invalid("range", "hi must be >= lo"));
        }
        Ok(GridRange { lo, hi, step })
    }

    pub fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn node(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count()).map(|k| self.node(k)).collect()
    }
}

/// Rectangular phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x: GridRange,
    pub y: GridRange,
}

impl PhaseGrid {
    pub fn new(x: GridRange, y: GridRange) -> Self {
        PhaseGrid { x, y }
    }

    /// Symmetric box [-half, half]^2 with equal steps.
    pub fn centered(half: f64, step: f64) -> Result<Self> {
        let r = GridRange::new(-half, half, step)?;
        Ok(PhaseGrid { x: r, y: r })
    }

    pub fn len(&self) -> usize {
        self.x.count() * self.y.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampled values of V_phi g on a [`PhaseGrid`], stored x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StftField {
    grid: PhaseGrid,
    values: Vec<Complex64>,
    source: String,
}

impl StftField {
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.grid.y.count() + iy]
    }

    /// Riemann quadrature of |G|^2 over the whole grid.
    pub fn mass(&self) -> f64 {
        let da = self.grid.x.step * self.grid.y.step;
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * da
    }

    /// Riemann quadrature of |G|^2 over grid nodes inside the closed box
    /// |x - cx| <= rx, |y - cy| <= ry.
    pub fn box_mass(&self, cx: f64, cy: f64, rx: f64, ry: f64) -> f64 {
        let da = self.grid.x.step * self.grid.y.step;
        let nx = self.grid.x.count();
        let ny = self.grid.y.count();
        let mut acc = 0.0;
        for ix in 0..nx {
            let x = self.grid.x.node(ix);
            if (x - cx).abs() > rx + 1e-12 {
                continue;
            }
            for iy in 0..ny {
                let y = self.grid.y.node(iy);
                if (y - cy).abs() <= ry + 1e-12 {
                    acc += self.values[ix * ny + iy].norm_sqr();
                }
            }
        }
        acc * da
    }

    /// Bilinear interpolation of |G(u, v)|^2; zero outside the grid.
    pub fn interp_abs_sq(&self, u: f64, v: f64) -> f64 {
        let gx = &self.grid.x;
        let gy = &self.grid.y;
        let fx = (u - gx.lo) / gx.step;
        let fy = (v - gy.lo) / gy.step;
        if fx < 0.0 || fy < 0.0 || fx > (gx.count() - 1) as f64 || fy > (gy.count() - 1) as f64 {
            return 0.0;
        }
        let ny = gy.count();
        let q = |i: usize, j: usize| self.values[i * ny + j].norm_sqr();
        if gx.count() == 1 || gy.count() == 1 {
            return q(
                (fx.round() as usize).min(gx.count() - 1),
                (fy.round() as usize).min(ny - 1),
            );
        }
        let ix = (fx.floor() as usize).min(gx.count() - 2);
        let iy = (fy.floor() as usize).min(ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        q(ix, iy) * (1.0 - tx) * (1.0 - ty)
            + q(ix + 1, iy) * tx * (1.0 - ty)
            + q(ix, iy + 1) * (1.0 - tx) * ty
            + q(ix + 1, iy + 1) * tx * ty
    }
}

/// The fixed analysis window: unit-norm Gaussian C e^{-t^2}.
pub fn window(grid: &TimeGrid) -> Result<SampledSignal> {
    make_preset(&Preset::Gaussian, grid)
}

fn check_margin(grid: &TimeGrid, x: f64) -> Result<()> {
    if x.abs() > grid.half_width() - STFT_WINDOW_MARGIN {
        return Err(Error::Truncation {
            lost_fraction: (-2.0 * (grid.half_width() - x.abs()).max(0.0).powi(2)).exp(),
        });
    }
    Ok(())
}

/// V_phi g at a single phase-space point, by direct quadrature.
pub fn stft_point(g: &SampledSignal, p: PhasePoint) -> Result<Complex64> {
    check_margin(g.grid(), p.x)?;
    Ok(stft_point_unchecked(g, p.x, p.y))
}

fn stft_point_unchecked(g: &SampledSignal, x: f64, y: f64) -> Complex64 {
    let grid = g.grid();
    let h = grid.step();
    let c = gaussian_normalizer();
    let mut acc = Complex64::default();
    for (t, v) in grid.nodes().zip(g.values()) {
        let w = c * (-(t - x) * (t - x)).exp();
        acc += v * w * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * y * t);
    }
    acc * h
}

/// Evaluate V_phi g on a whole phase grid (parallel over x-columns).
pub fn stft_field(g: &SampledSignal, grid: &PhaseGrid) -> Result<StftField> {
    let xs = grid.x.nodes();
    let ys = grid.y.nodes();
    for &x in &xs {
        check_margin(g.grid(), x)?;
    }
    let tg = g.grid();
    let ts: Vec<f64> = tg.nodes().collect();
    let h = tg.step();
    let c = gaussian_normalizer();
    let values: Vec<Complex64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            // windowed copy shared by the whole column
            let wg: Vec<Complex64> = ts
                .iter()
                .zip(g.values())
                .map(|(&t, v)| v * (c * (-(t - x) * (t - x)).exp()))
                .collect();
            ys.iter()
                .map(|&y| {
                    let mut acc = Complex64::default();
                    for (&t, wv) in ts.iter().zip(&wg) {
                        acc += wv * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * y * t);
                    }
                    acc * h
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(StftField { grid: *grid, values, source: g.describe() })
}

/// Check the covariance identity |V_phi (M_mu T_lam g)(x, y)| = |V_phi g(x - lam, y - mu)|
/// over a list of sample points.
pub fn check_covariance(
    g: &SampledSignal,
    shift: PhasePoint,
    sample_points: &[PhasePoint],
) -> Result<VerificationReport> {
    let shifted = translate_modulate(g, shift.x, shift.y)?;
    let mut worst = 0.0_f64;
    for p in sample_points {
        let lhs = stft_point(&shifted, *p)?.norm();
        let rhs = stft_point(g, PhasePoint::new(p.x - shift.x, p.y - shift.y))?.norm();
        worst = worst.max((lhs - rhs).abs());
    }
    let mut report = VerificationReport::new("covariance");
    report
        .input("generator", g.describe())
        .input("shift", format!("({}, {})", shift.x, shift.y))
        .input("sample_points", sample_points.len().to_string())
        .measure("max_discrepancy", worst)
        .bound("tolerance", COVARIANCE_TOL)
        .tolerance("covariance_tol", COVARIANCE_TOL)
        .check(COVARIANCE_TOL - worst, 0.0);
    Ok(report)
}

/// Quadrature of the weighted field integral (|x|^a + |y|^a) |G|^2 dx dy,
/// with a nested-box Cauchy test for divergence.
pub fn weighted_field_norm_sq(field: &StftField, alpha: &WeightExponent) -> Result<f64> {
    let a = alpha.alpha();
    let gx = &field.grid().x;
    let gy = &field.grid().y;
    let da = gx.step * gy.step;
    let ny = gy.count();
    let xs = gx.nodes();
    let ys = gy.nodes();
    let cx = 0.5 * (gx.lo + gx.hi);
    let cy = 0.5 * (gy.lo + gy.hi);
    let hx = 0.5 * (gx.hi - gx.lo);
    let hy = 0.5 * (gy.hi - gy.lo);

    let integral = |fx: f64| -> f64 {
        let mut acc = 0.0;
        for (ix, &x) in xs.iter().enumerate() {
            if (x - cx).abs() > fx * hx + 1e-12 {
                continue;
            }
            for (iy, &y) in ys.iter().enumerate() {
                if (y - cy).abs() <= fx * hy + 1e-12 {
                    acc += (x.abs().powf(a) + y.abs().powf(a))
                        * field.values()[ix * ny + iy].norm_sqr();
                }
            }
        }
        acc * da
    };

    let inner = integral(0.75);
    let full = integral(1.0);
    if full > 1e-300 && (full - inner) > WEIGHTED_TAIL_FRACTION * full {
        return Err(Error::DivergenceWarning { last_increment: (full - inner) / full });
    }
    Ok(full)
}

/// Deterministic low-discrepancy-ish sample points in a box, for covariance
/// and covering checks (seeded, reproducible).
pub fn sample_points_in_box(n: usize, half: f64, seed: u64) -> Vec<PhasePoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PhasePoint::new(rng.gen_range(-half..half), rng.gen_range(-half..half)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{inner_product, make_preset, Preset};

    fn grid() -> TimeGrid {
        TimeGrid::default_grid()
    }

    fn phi() -> SampledSignal {
        window(&grid()).unwrap()
    }

    #[test]
    fn window_is_normalized() {
        let w = phi();
        assert!((w.norm_sq() - 1.0).abs() < 1e-8);
        let c = gaussian_normalizer();
        assert!((c - 0.893_243_841_738_002_4_f64).abs() < 1e-12);
        assert!((w.values()[grid().count() / 2].re - c).abs() < 1e-12);
    }

    #[test]
    fn stft_point_at_origin_is_norm() {
        let w = phi();
        let v = stft_point(&w, PhasePoint::new(0.0, 0.0)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-8 && v.im.abs() < 1e-12);
        let ip = inner_product(&w, &w).unwrap();
        assert!((v - ip).norm() < 1e-10);
    }

    #[test]
    fn stft_gaussian_modulus_oracle() {
        // |V_phi phi(x, y)| = e^{-x^2/2 - pi^2 y^2/2} by completing the square
        let w = phi();
        for &(x, y) in &[(0.5, 0.0), (0.0, 0.7), (1.0, 1.0), (-1.3, 0.4), (2.0, -2.0)] {
            let v = stft_point(&w, PhasePoint::new(x, y)).unwrap().norm();
            let oracle = (-x * x / 2.0 - std::f64::consts::PI.powi(2) * y * y / 2.0).exp();
            assert!((v - oracle).abs() < 1e-6 * oracle.max(1e-3), "({x},{y})");
        }
    }

    #[test]
    fn stft_zero_signal() {
        let z = SampledSignal::zero(grid());
        assert_eq!(stft_point(&z, PhasePoint::new(1.0, 1.0)).unwrap(), Complex64::default());
    }

    #[test]
    fn stft_off_grid_truncation() {
        let w = phi();
        assert!(matches!(
            stft_point(&w, PhasePoint::new(10.0, 0.0)),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn field_max_at_origin_and_cauchy_schwarz() {
        let w = phi();
        let pg = PhaseGrid::centered(3.0, 0.25).unwrap();
        let field = stft_field(&w, &pg).unwrap();
        let norm = w.norm_sq().sqrt();
        let mut best = (0.0, 0usize);
        for (i, v) in field.values().iter().enumerate() {
            assert!(v.norm() <= norm + 1e-9);
            if v.norm() > best.0 {
                best = (v.norm(), i);
            }
        }
        let ny = pg.y.count();
        let (ix, iy) = (best.1 / ny, best.1 % ny);
        assert!((pg.x.node(ix)).abs() < 1e-9 && (pg.y.node(iy)).abs() < 1e-9);
    }

    #[test]
    fn field_unitarity_gaussian() {
        let w = phi();
        let pg = PhaseGrid::centered(8.0, 0.1).unwrap();
        let field = stft_field(&w, &pg).unwrap();
        assert!((field.mass() - w.norm_sq()).abs() / w.norm_sq() < 1e-3);
    }

    #[test]
    fn empty_grid_gives_empty_field() {
        let w = phi();
        let pg = PhaseGrid::new(
            GridRange::new(0.0, 0.0, 1.0).unwrap(),
            GridRange::new(0.0, 0.0, 1.0).unwrap(),
        );
        let field = stft_field(&w, &pg).unwrap();
        assert_eq!(field.values().len(), 1); // degenerate single-node grid
    }

    #[test]
    fn covariance_zero_shift_exact() {
        let w = phi();
        let pts = sample_points_in_box(20, 2.0, 7);
        let rep = check_covariance(&w, PhasePoint::new(0.0, 0.0), &pts).unwrap();
        assert!(rep.pass);
        assert!(rep.measured[0].value < 1e-12);
    }

    #[test]
    fn covariance_gaussian_and_hermite() {
        let pts = sample_points_in_box(100, 2.0, 42);
        let w = phi();
        let rep = check_covariance(&w, PhasePoint::new(1.0, 0.5), &pts).unwrap();
        assert!(rep.pass, "gaussian: {}", rep.measured[0].value);

        let h1 = make_preset(&Preset::Hermite { k: 1 }, &grid()).unwrap();
        let rep = check_covariance(&h1, PhasePoint::new(0.5, 0.5), &pts).unwrap();
        assert!(rep.pass, "hermite_1: {}", rep.measured[0].value);
    }

    #[test]
    fn weighted_field_norm_stable_under_box_growth() {
        let w = phi();
        let alpha = WeightExponent::new(2.0).unwrap();
        let f6 = stft_field(&w, &PhaseGrid::centered(6.0, 0.1).unwrap()).unwrap();
        let f8 = stft_field(&w, &PhaseGrid::centered(8.0, 0.1).unwrap()).unwrap();
        let v6 = weighted_field_norm_sq(&f6, &alpha).unwrap();
        let v8 = weighted_field_norm_sq(&f8, &alpha).unwrap();
        assert!((v8 - v6).abs() / v8 < 0.01, "{v6} vs {v8}");

        let z = SampledSignal::zero(grid());
        let fz = stft_field(&z, &PhaseGrid::centered(2.0, 0.5).unwrap()).unwrap();
        assert_eq!(weighted_field_norm_sq(&fz, &alpha).unwrap(), 0.0);
    }

    #[test]
    fn weighted_field_divergence_warning() {
        // the indicator's transform decays like 1/y, so the alpha = 2
        // weighted integrand has constant-rate mass in y and the nested-box
        // Cauchy test must flag it
        let g = make_preset(&Preset::Indicator { a: 1.0 }, &grid()).unwrap();
        let field = stft_field(&g, &PhaseGrid::centered(8.0, 0.2).unwrap()).unwrap();
        let alpha = WeightExponent::new(2.0).unwrap();
        assert!(matches!(
            weighted_field_norm_sq(&field, &alpha),
            Err(Error::DivergenceWarning { .. })
        ));
    }

    #[test]
    fn weighted_field_bound_from_signal_quantities() {
        // time-frequency localization transfer: the weighted field norm is
        // controlled by C(a) * (||g||^2 ||phi||^2_a + ||phi||^2 ||g||^2_a)
        // plus the same expression on the Fourier side.
        use crate::signal::{fourier_transform, weighted_norm_sq};
        for (p, a) in [(Preset::Gaussian, 1.0), (Preset::Gaussian, 2.0), (Preset::Hermite { k: 1 }, 2.0)] {
            let g = make_preset(&p, &grid()).unwrap();
            let alpha = WeightExponent::new(a).unwrap();
            let field = stft_field(&g, &PhaseGrid::centered(8.0, 0.1).unwrap()).unwrap();
            let lhs = weighted_field_norm_sq(&field, &alpha).unwrap();
            let w = phi();
            let gh = fourier_transform(&g).unwrap();
            let wh = fourier_transform(&w).unwrap();
            let ca = if a <= 1.0 { 1.0 } else { 2.0_f64.powf(a - 1.0) };
            let rhs = ca
                * (g.norm_sq() * weighted_norm_sq(&w, &alpha)
                    + w.norm_sq() * weighted_norm_sq(&g, &alpha)
                    + gh.norm_sq() * weighted_norm_sq(&wh, &alpha)
                    + wh.norm_sq() * weighted_norm_sq(&gh, &alpha));
            assert!(lhs <= rhs + 1e-9, "{p:?} alpha={a}: {lhs} > {rhs}");
        }
    }
}
