//! Finite Gabor sections as vector systems: Gram matrices, Riesz/frame
//! bounds via the extreme eigenvalues, orthogonal projections, biorthogonal
//! duals, the projector-trace quadrature, and minimality margins.
//!
//! Gram inversion always goes through the eigendecomposition so that the
//! conditioning B/A is available to every error path, and rank deficiency
//! (eigenvalues below 1e-8 of the top) is detected rather than amplified.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::{Cube, PointSet};
use crate::report::VerificationReport;
use crate::signal::{inner_product, translate_modulate, SampledSignal};
use crate::stft::{stft_field, PhaseGrid};
use crate::tolerances::{
    BIORTH_IM_TOL, BIORTH_MATCH_TOL, BIORTH_RANGE_TOL, GRAM_HERMITIAN_TOL, GRAM_INDEFINITE_TOL,
    RANK_REL_CUTOFF, TRACE_REL_TOL,
};

/// One atom of a Gabor section: generator index plus the (lambda, mu) shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborAtomRef {
    pub generator_index: usize,
    pub lambda: f64,
    pub mu: f64,
}

/// A finite span of time-frequency shifted generators, realized on a grid.
#[derive(Debug, Clone)]
pub struct GaborSection {
    generators: Vec<SampledSignal>,
    atoms: Vec<GaborAtomRef>,
    realized: Vec<SampledSignal>,
}

impl GaborSection {
    pub fn new(generators: Vec<SampledSignal>, atoms: Vec<GaborAtomRef>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::invalid("generators", "need at least one generator"));
        }
        let grid = *generators[0].grid();
        if generators.iter().any(|g| g.grid() != &grid) {
            return Err(Error::GridMismatch);
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.generator_index >= generators.len() {
                return Err(Error::invalid("atoms", "generator_index out of range"));
            }
            for b in &atoms[..i] {
                if a.generator_index == b.generator_index && a.lambda == b.lambda && a.mu == b.mu {
                    return Err(Error::invalid("atoms", "duplicate (generator, lambda, mu) triple"));
                }
            }
        }
        let realized = atoms
            .iter()
            .map(|a| translate_modulate(&generators[a.generator_index], a.lambda, a.mu))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaborSection { generators, atoms, realized })
    }

    /// Section of a single generator over the points of `ps` inside `filter`.
    pub fn from_points(generator: SampledSignal, ps: &PointSet, filter: Option<&Cube>) -> Result<Self> {
        let atoms = ps
            .points()
            .iter()
            .filter(|p| filter.map_or(true, |c| c.contains(p)))
            .map(|p| GaborAtomRef { generator_index: 0, lambda: p.x, mu: p.y })
            .collect();
        GaborSection::new(vec![generator], atoms)
    }

    pub fn atoms(&self) -> &[GaborAtomRef] {
        &self.atoms
    }

    pub fn realized(&self) -> &[SampledSignal] {
        &self.realized
    }

    pub fn generators(&self) -> &[SampledSignal] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn grid(&self) -> &crate::signal::TimeGrid {
        self.generators[0].grid()
    }
}

/// Hermitian matrix of atom inner products; entry (i, j) = <f_j, f_i>.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<Complex64>,
}

/// Eigendecomposition of a Gram matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct GramEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("entries", "matrix must be square"));
        }
        let mut asym = 0.0_f64;
        for i in 0..entries.nrows() {
            for j in 0..=i {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                asym = asym.max(d);
            }
        }
        if asym > GRAM_HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(GramMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn eigen(&self) -> GramEigen {
        if self.dim() == 0 {
            return GramEigen { values: vec![], vectors: DMatrix::zeros(0, 0) };
        }
        let se = nalgebra::linalg::SymmetricEigen::new(self.entries.clone());
        let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let values: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = DMatrix::from_columns(
            &idx.iter().map(|&i| se.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
        );
        GramEigen { values, vectors }
    }

    /// Numerical rank: eigenvalues above RANK_REL_CUTOFF of the largest.
    pub fn numerical_rank(&self, eigen: &GramEigen) -> usize {
        let top = eigen.values.last().copied().unwrap_or(0.0);
        eigen.values.iter().filter(|&&v| v > RANK_REL_CUTOFF * top.max(f64::MIN_POSITIVE)).count()
    }
}

/// Assemble the Gram matrix of a section by quadrature inner products.
pub fn gram_matrix(sec: &GaborSection) -> Result<GramMatrix> {
    let n = sec.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            // entry (i, j) = <f_j, f_i>
            let v = inner_product(&sec.realized()[j], &sec.realized()[i])?;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    GramMatrix::from_entries(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsKind {
    RieszSection,
    FrameSection,
}

/// Lower/upper bounds A, B of a finite section with its conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundsKind,
    pub conditioning: Option<f64>,
}

/// Section bounds from the extreme Gram eigenvalues. For a finite section
/// the Riesz-sequence and frame bounds coincide.
pub fn riesz_bounds(gm: &GramMatrix) -> Result<BoundsReport> {
    let eigen = gm.eigen();
    let min = eigen.values.first().copied().unwrap_or(0.0);
    let max = eigen.values.last().copied().unwrap_or(0.0);
    if min < GRAM_INDEFINITE_TOL {
        return Err(Error::IndefiniteGram { min_eigenvalue: min });
    }
    let lower = min.max(0.0);
    let conditioning = if lower > 0.0 { Some(max / lower) } else { None };
    Ok(BoundsReport { lower, upper: max, kind: BoundsKind::RieszSection, conditioning })
}

fn pd_inverse(gm: &GramMatrix) -> Result<(DMatrix<Complex64>, GramEigen)> {
    let eigen = gm.eigen();
    let min = eigen.values.first().copied().unwrap_or(0.0);
    let max = eigen.values.last().copied().unwrap_or(0.0);
    if min <= 0.0 || max <= 0.0 {
        return Err(Error::SingularGram);
    }
    if min <= RANK_REL_CUTOFF * max {
        return Err(Error::IllConditioned { condition: max / min });
    }
    Ok((inverse_from_eigen(&eigen, None), eigen))
}

fn inverse_from_eigen(eigen: &GramEigen, rank_cutoff: Option<f64>) -> DMatrix<Complex64> {
    let n = eigen.values.len();
    let mut inv = DMatrix::<Complex64>::zeros(n, n);
    let top = eigen.values.last().copied().unwrap_or(0.0);
    for (k, &lam) in eigen.values.iter().enumerate() {
        let keep = match rank_cutoff {
            Some(cut) => lam > cut * top,
            None => true,
        };
        if !keep {
            continue;
        }
        let u = eigen.vectors.column(k);
        let scale = Complex64::new(1.0 / lam, 0.0);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] += u[i] * u[j].conj() * scale;
            }
        }
    }
    inv
}

/// Orthogonal projection of f onto the span of the section.
pub fn project(sec: &GaborSection, f: &SampledSignal) -> Result<SampledSignal> {
    if sec.is_empty() {
        return Ok(SampledSignal::zero(*sec.grid()));
    }
    let gm = gram_matrix(sec)?;
    let (inv, _) = pd_inverse(&gm)?;
    let b = DVector::from_iterator(
        sec.len(),
        sec.realized()
            .iter()
            .map(|atom| inner_product(f, atom))
            .collect::<Result<Vec<_>>>()?
            .into_iter(),
    );
    let coeffs = &inv * b;
    let mut out = vec![Complex64::default(); sec.grid().count()];
    for (c, atom) in coeffs.iter().zip(sec.realized()) {
        for (o, v) in out.iter_mut().zip(atom.values()) {
            *o += c * v;
        }
    }
    SampledSignal::new(*sec.grid(), out)
}

/// Biorthogonal dual system h_n = sum_m (G^{-1})_{nm} f_m.
pub fn dual_system(sec: &GaborSection) -> Result<Vec<SampledSignal>> {
    let gm = gram_matrix(sec)?;
    let (inv, _) = pd_inverse(&gm)?;
    duals_from_inverse(sec, &inv)
}

/// Rank-truncated duals for overcomplete sections: eigenvalues below the
/// rank cutoff are dropped instead of inverted. Returns the kept rank.
pub fn pseudo_dual_system(sec: &GaborSection) -> Result<(Vec<SampledSignal>, usize)> {
    let gm = gram_matrix(sec)?;
    let eigen = gm.eigen();
    let rank = gm.numerical_rank(&eigen);
    if rank == 0 {
        return Err(Error::SingularGram);
    }
    let inv = inverse_from_eigen(&eigen, Some(RANK_REL_CUTOFF));
    Ok((duals_from_inverse(sec, &inv)?, rank))
}

fn duals_from_inverse(sec: &GaborSection, inv: &DMatrix<Complex64>) -> Result<Vec<SampledSignal>> {
    let n = sec.len();
    let len = sec.grid().count();
    (0..n)
        .map(|row| {
            let mut out = vec![Complex64::default(); len];
            for m in 0..n {
                let c = inv[(row, m)];
                for (o, v) in out.iter_mut().zip(sec.realized()[m].values()) {
                    *o += c * v;
                }
            }
            SampledSignal::new(*sec.grid(), out)
        })
        .collect()
}

/// Per-atom STFT fields of a section over a phase grid (parallel).
fn atom_fields(sec: &GaborSection, grid: &PhaseGrid) -> Result<Vec<crate::stft::StftField>> {
    sec.realized()
        .par_iter()
        .map(|atom| stft_field(atom, grid))
        .collect()
}

/// Quadrature of ||P_W phi_xy||^2 over a box, compared against dim W.
///
/// The integrand is b^H G^{-1} b with b_n = conj(V_phi f_n(x, y)), assembled
/// from per-atom fields; dim W is the numerical rank of the Gram matrix.
pub fn trace_identity_check(sec: &GaborSection, quad_box: &Cube, quad_step: f64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("trace_identity");
    report
        .input("atoms", sec.len().to_string())
        .input("box_half_side", quad_box.half_side.to_string())
        .input("quad_step", quad_step.to_string())
        .tolerance("trace_rel_tol", TRACE_REL_TOL);

    if sec.is_empty() {
        report.measure("integral", 0.0).bound("dim_w", 0.0).check(0.0, 0.0);
        return Ok(report);
    }
    if !(quad_step > 0.0) {
        return Err(Error::invalid("quad_step", "must be positive"));
    }

    let gm = gram_matrix(sec)?;
    let eigen = gm.eigen();
    let rank = gm.numerical_rank(&eigen);
    let inv = inverse_from_eigen(&eigen, Some(RANK_REL_CUTOFF));
    if rank < sec.len() {
        report.warn(format!(
            "section is rank-deficient: numerical rank {rank} of {}",
            sec.len()
        ));
    }

    let grid = PhaseGrid::new(
        crate::stft::GridRange::new(
            quad_box.center.0 - quad_box.half_side,
            quad_box.center.0 + quad_box.half_side,
            quad_step,
        )?,
        crate::stft::GridRange::new(
            quad_box.center.1 - quad_box.half_side,
            quad_box.center.1 + quad_box.half_side,
            quad_step,
        )?,
    );
    let fields = atom_fields(sec, &grid)?;

    // tail estimate: per-atom field mass missing from the box, scaled by
    // the inverse spectrum (Gaussian-envelope heuristic)
    let lam_min = eigen.values.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let tail: f64 = fields
        .iter()
        .zip(sec.realized())
        .map(|(f, atom)| (atom.norm_sq() - f.mass()).max(0.0))
        .sum::<f64>()
        / lam_min.max(1e-12);
    if tail > 0.5 * TRACE_REL_TOL * rank as f64 {
        return Err(Error::CoverageShortfall { estimate: tail });
    }

    let n = sec.len();
    let nodes = grid.len();
    let da = quad_step * quad_step;
    let integral: f64 = (0..nodes)
        .into_par_iter()
        .map(|idx| {
            let mut b = vec![Complex64::default(); n];
            for (bn, f) in b.iter_mut().zip(&fields) {
                *bn = f.values()[idx].conj();
            }
            let mut acc = Complex64::default();
            for i in 0..n {
                let mut row = Complex64::default();
                for j in 0..n {
                    row += inv[(i, j)] * b[j];
                }
                acc += b[i].conj() * row;
            }
            acc.re
        })
        .sum::<f64>()
        * da;

    let dim_w = rank as f64;
    let rel_dev = (integral - dim_w).abs() / dim_w.max(1.0);
    report
        .measure("integral", integral)
        .measure("relative_deviation", rel_dev)
        .bound("dim_w", dim_w)
        .constant("tail_estimate", tail)
        .check(TRACE_REL_TOL - rel_dev, 0.0);
    Ok(report)
}

/// Evaluate S(x, y) = sum_n V_phi f_n conj(V_phi h_n) on a grid and compare
/// it against the projection-norm field b^H G^{-1} b computed from the Gram
/// route. The duals must come from the same section.
pub fn biorthogonal_sum_field(
    sec: &GaborSection,
    duals: &[SampledSignal],
    grid: &PhaseGrid,
) -> Result<VerificationReport> {
    if duals.len() != sec.len() {
        return Err(Error::SectionMismatch { reason: "dual count differs from atom count".into() });
    }
    if duals.iter().any(|h| h.grid() != sec.grid()) {
        return Err(Error::SectionMismatch { reason: "duals live on a different grid".into() });
    }
    let gm = gram_matrix(sec)?;
    let (inv, _) = pd_inverse(&gm)?;

    let atom_f = atom_fields(sec, grid)?;
    let dual_f: Vec<_> = duals
        .par_iter()
        .map(|h| stft_field(h, grid))
        .collect::<Result<Vec<_>>>()?;

    let n = sec.len();
    let mut max_im = 0.0_f64;
    let mut min_re = f64::INFINITY;
    let mut max_re = f64::NEG_INFINITY;
    let mut max_match = 0.0_f64;
    for idx in 0..grid.len() {
        let mut s = Complex64::default();
        let mut b = vec![Complex64::default(); n];
        for i in 0..n {
            s += atom_f[i].values()[idx] * dual_f[i].values()[idx].conj();
            b[i] = atom_f[i].values()[idx].conj();
        }
        let mut proj = Complex64::default();
        for i in 0..n {
            let mut row = Complex64::default();
            for j in 0..n {
                row += inv[(i, j)] * b[j];
            }
            proj += b[i].conj() * row;
        }
        max_im = max_im.max(s.im.abs());
        min_re = min_re.min(s.re);
        max_re = max_re.max(s.re);
        max_match = max_match.max((s - proj).norm());
    }

    let mut report = VerificationReport::new("biorthogonal_sum");
    report
        .input("atoms", n.to_string())
        .input("grid_nodes", grid.len().to_string())
        .measure("max_abs_im", max_im)
        .measure("min_re", min_re)
        .measure("max_re", max_re)
        .measure("max_projection_mismatch", max_match)
        .tolerance("im_tol", BIORTH_IM_TOL)
        .tolerance("range_tol", BIORTH_RANGE_TOL)
        .tolerance("match_tol", BIORTH_MATCH_TOL)
        .check(BIORTH_IM_TOL - max_im, 0.0)
        .check(min_re + BIORTH_RANGE_TOL, 0.0)
        .check(1.0 + BIORTH_RANGE_TOL - max_re, 0.0)
        .check(BIORTH_MATCH_TOL - max_match, 0.0);
    Ok(report)
}

/// Minimality data of a section: the exact distance from each atom to the
/// span of the others is 1/sqrt((G^{-1})_nn).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    /// min_n dist(f_n, span of the rest); 0 when the Gram is singular.
    pub margin: f64,
    /// max_n ||h_n|| over the biorthogonal duals (the bounded-dual constant).
    pub max_dual_norm: f64,
    pub minimal: bool,
}

pub fn uniform_minimality_margin(gm: &GramMatrix) -> Result<MinimalityReport> {
    let eigen = gm.eigen();
    let max = eigen.values.last().copied().unwrap_or(0.0);
    let min = eigen.values.first().copied().unwrap_or(0.0);
    if min <= RANK_REL_CUTOFF * max || max <= 0.0 {
        return Ok(MinimalityReport { margin: 0.0, max_dual_norm: f64::INFINITY, minimal: false });
    }
    let inv = inverse_from_eigen(&eigen, None);
    let mut margin = f64::INFINITY;
    let mut max_dual = 0.0_f64;
    for i in 0..gm.dim() {
        let d = inv[(i, i)].re;
        margin = margin.min(1.0 / d.sqrt());
        max_dual = max_dual.max(d.sqrt());
    }
    Ok(MinimalityReport { margin, max_dual_norm: max_dual, minimal: true })
}

/// Gaussian atom overlap modulus: |<phi_{x1 y1}, phi_{x2 y2}>| for the
/// normalized window, used as an oracle in tests.
pub fn gaussian_overlap_modulus(dx: f64, dy: f64) -> f64 {
    (-dx * dx / 2.0 - std::f64::consts::PI.powi(2) * dy * dy / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_preset, Preset, TimeGrid};
    use crate::stft::GridRange;
    use approx::assert_relative_eq;

    fn grid() -> TimeGrid {
        TimeGrid::default_grid()
    }

    fn gaussian_section(points: &[(f64, f64)]) -> GaborSection {
        let g = make_preset(&Preset::Gaussian, &grid()).unwrap();
        let atoms = points
            .iter()
            .map(|&(l, m)| GaborAtomRef { generator_index: 0, lambda: l, mu: m })
            .collect();
        GaborSection::new(vec![g], atoms).unwrap()
    }

    #[test]
    fn gram_single_atom() {
        let sec = gaussian_section(&[(0.0, 0.0)]);
        let gm = gram_matrix(&sec).unwrap();
        assert_eq!(gm.dim(), 1);
        assert!((gm.entries()[(0, 0)].re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gram_gaussian_pair_offdiagonal() {
        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 1.0)]);
        let gm = gram_matrix(&sec).unwrap();
        let r = gaussian_overlap_modulus(1.0, 1.0);
        assert!((gm.entries()[(0, 1)].norm() - r).abs() < 1e-6);
    }

    #[test]
    fn gram_orthogonal_indicator_atoms() {
        let g = make_preset(&Preset::ModulatedIndicator { n: 0 }, &grid()).unwrap();
        let atoms = vec![
            GaborAtomRef { generator_index: 0, lambda: 0.0, mu: 0.0 },
            GaborAtomRef { generator_index: 0, lambda: 1.0, mu: 0.0 },
        ];
        let sec = GaborSection::new(vec![g], atoms).unwrap();
        let gm = gram_matrix(&sec).unwrap();
        assert!((gm.entries()[(0, 0)].re - 1.0).abs() < 1e-8);
        assert!(gm.entries()[(0, 1)].norm() < 1e-8);
    }

    #[test]
    fn riesz_bounds_closed_forms() {
        let id = GramMatrix::from_entries(DMatrix::identity(3, 3)).unwrap();
        let b = riesz_bounds(&id).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);

        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 1.0)]);
        let gm = gram_matrix(&sec).unwrap();
        let r = gaussian_overlap_modulus(1.0, 1.0);
        let b = riesz_bounds(&gm).unwrap();
        assert!((b.lower - (1.0 - r)).abs() < 1e-6);
        assert!((b.upper - (1.0 + r)).abs() < 1e-6);
    }

    #[test]
    fn riesz_bounds_sparse_lattice_sections_stay_away_from_zero() {
        // spacing-2 sections grow 3x3 -> 5x5 -> 7x7 per side; the lower
        // bound decreases but stays above 0.7 (measured trend)
        let mut last = f64::INFINITY;
        for k in [1_i64, 2, 3] {
            let pts: Vec<(f64, f64)> = (-k..=k)
                .flat_map(|i| (-k..=k).map(move |j| (2.0 * i as f64, 2.0 * j as f64)))
                .collect();
            let sec = gaussian_section(&pts);
            let b = riesz_bounds(&gram_matrix(&sec).unwrap()).unwrap();
            assert!(b.lower < last);
            assert!(b.lower > 0.7, "A = {}", b.lower);
            last = b.lower;
        }
    }

    #[test]
    fn indefinite_gram_rejected() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(1, 1)] = Complex64::new(-1e-3, 0.0);
        let gm = GramMatrix::from_entries(m).unwrap();
        assert!(matches!(riesz_bounds(&gm), Err(Error::IndefiniteGram { .. })));
    }

    #[test]
    fn riesz_sandwich_random_coefficients() {
        use rand::{Rng, SeedableRng};
        let sec = gaussian_section(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)]);
        let gm = gram_matrix(&sec).unwrap();
        let b = riesz_bounds(&gm).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let coeffs: Vec<Complex64> =
                (0..4).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mut combo = vec![Complex64::default(); sec.grid().count()];
            for (c, atom) in coeffs.iter().zip(sec.realized()) {
                for (o, v) in combo.iter_mut().zip(atom.values()) {
                    *o += c * v;
                }
            }
            let sig = SampledSignal::new(*sec.grid(), combo).unwrap();
            let energy = sig.norm_sq();
            let csum: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            assert!(b.lower * csum <= energy * (1.0 + 1e-6) + 1e-9);
            assert!(energy <= b.upper * csum * (1.0 + 1e-6) + 1e-9);
        }
    }

    #[test]
    fn projection_examples() {
        let sec = gaussian_section(&[(0.0, 0.0), (2.0, 0.0)]);
        let f0 = sec.realized()[0].clone();
        let p = project(&sec, &f0).unwrap();
        let diff: f64 = p
            .values()
            .iter()
            .zip(f0.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * grid().step();
        assert!(diff.sqrt() < 1e-8);

        // idempotence and contraction
        let h2 = make_preset(&Preset::Hermite { k: 2 }, &grid()).unwrap();
        let p1 = project(&sec, &h2).unwrap();
        let p2 = project(&sec, &p1).unwrap();
        let d: f64 = p1
            .values()
            .iter()
            .zip(p2.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * grid().step();
        assert!(d.sqrt() < 1e-6);
        assert!(p1.norm_sq() <= h2.norm_sq() + 1e-9);
    }

    #[test]
    fn projection_of_orthogonal_signal_vanishes() {
        let g = make_preset(&Preset::ModulatedIndicator { n: 0 }, &grid()).unwrap();
        let atoms = vec![GaborAtomRef { generator_index: 0, lambda: 0.0, mu: 0.0 }];
        let sec = GaborSection::new(vec![g.clone()], atoms).unwrap();
        let far = translate_modulate(&g, 2.0, 0.0).unwrap();
        let p = project(&sec, &far).unwrap();
        assert!(p.norm_sq().sqrt() < 1e-8);
    }

    #[test]
    fn projection_norm_in_unit_interval() {
        use rand::{Rng, SeedableRng};
        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let w = crate::stft::window(&grid()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let phi_xy = translate_modulate(&w, x, y).unwrap();
            let p = project(&sec, &phi_xy).unwrap();
            let v = p.norm_sq();
            assert!((-1e-9..=1.0 + 1e-6).contains(&v), "({x},{y}): {v}");
        }
    }

    #[test]
    fn ill_conditioned_projection_errors() {
        let sec = gaussian_section(&[(0.0, 0.0), (1e-6, 0.0)]);
        let f = sec.realized()[0].clone();
        match project(&sec, &f) {
            Err(Error::IllConditioned { condition }) => assert!(condition > 1e8),
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }

    #[test]
    fn dual_system_properties() {
        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 1.0)]);
        let duals = dual_system(&sec).unwrap();
        let gm = gram_matrix(&sec).unwrap();
        let eigen = gm.eigen();
        let inv = inverse_from_eigen(&eigen, None);
        for (n, h) in duals.iter().enumerate() {
            for (m, f) in sec.realized().iter().enumerate() {
                let ip = inner_product(f, h).unwrap();
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(expect, 0.0)).norm() < 1e-8, "({n},{m}) {ip}");
            }
            // ||h_n||^2 = (G^{-1})_nn
            assert_relative_eq!(h.norm_sq(), inv[(n, n)].re, epsilon = 1e-8);
        }
        // dual of the dual returns the atoms
        let dual_sec = GaborSection::new(
            duals.clone(),
            vec![
                GaborAtomRef { generator_index: 0, lambda: 0.0, mu: 0.0 },
                GaborAtomRef { generator_index: 1, lambda: 0.0, mu: 0.0 },
            ],
        )
        .unwrap();
        let back = dual_system(&dual_sec).unwrap();
        for (orig, got) in sec.realized().iter().zip(&back) {
            let d: f64 = orig
                .values()
                .iter()
                .zip(got.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                * grid().step();
            assert!(d.sqrt() < 1e-6);
        }
        // orthonormal atoms are their own duals
        let g = make_preset(&Preset::ModulatedIndicator { n: 0 }, &grid()).unwrap();
        let atoms = vec![
            GaborAtomRef { generator_index: 0, lambda: 0.0, mu: 0.0 },
            GaborAtomRef { generator_index: 0, lambda: 1.0, mu: 0.0 },
        ];
        let osec = GaborSection::new(vec![g], atoms).unwrap();
        let oduals = dual_system(&osec).unwrap();
        for (a, h) in osec.realized().iter().zip(&oduals) {
            let d: f64 = a
                .values()
                .iter()
                .zip(h.values())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                * grid().step();
            assert!(d.sqrt() < 1e-8);
        }
    }

    #[test]
    fn trace_identity_single_atom() {
        let sec = gaussian_section(&[(0.0, 0.0)]);
        let rep = trace_identity_check(&sec, &Cube::new((0.0, 0.0), 8.0).unwrap(), 0.1).unwrap();
        assert!(rep.pass, "{rep:?}");
        let integral = rep.measured.iter().find(|m| m.name == "integral").unwrap().value;
        assert!((integral - 1.0).abs() < 0.02);
    }

    #[test]
    fn trace_identity_empty_section() {
        let g = make_preset(&Preset::Gaussian, &grid()).unwrap();
        let sec = GaborSection::new(vec![g], vec![]).unwrap();
        let rep = trace_identity_check(&sec, &Cube::new((0.0, 0.0), 4.0).unwrap(), 0.2).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.measured[0].value, 0.0);
    }

    #[test]
    fn trace_identity_small_box_warns() {
        let sec = gaussian_section(&[(0.0, 0.0)]);
        assert!(matches!(
            trace_identity_check(&sec, &Cube::new((0.0, 0.0), 1.0).unwrap(), 0.1),
            Err(Error::CoverageShortfall { .. })
        ));
    }

    #[test]
    fn biorthogonal_sum_single_atom_matches_oracle() {
        let sec = gaussian_section(&[(0.0, 0.0)]);
        let duals = dual_system(&sec).unwrap();
        let pg = PhaseGrid::new(
            GridRange::new(-2.0, 2.0, 0.25).unwrap(),
            GridRange::new(-2.0, 2.0, 0.25).unwrap(),
        );
        let rep = biorthogonal_sum_field(&sec, &duals, &pg).unwrap();
        assert!(rep.pass, "{rep:?}");
        // S = |V_phi phi|^2 = e^{-x^2 - pi^2 y^2} at the origin node is 1
        let max_re = rep.measured.iter().find(|m| m.name == "max_re").unwrap().value;
        assert!((max_re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn biorthogonal_sum_far_from_atoms_vanishes() {
        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 0.0)]);
        let duals = dual_system(&sec).unwrap();
        let pg = PhaseGrid::new(
            GridRange::new(6.0, 7.0, 0.5).unwrap(),
            GridRange::new(0.0, 1.0, 0.5).unwrap(),
        );
        let rep = biorthogonal_sum_field(&sec, &duals, &pg).unwrap();
        let max_re = rep.measured.iter().find(|m| m.name == "max_re").unwrap().value;
        assert!(max_re < 1e-6);
    }

    #[test]
    fn minimality_margin_closed_forms() {
        let id = GramMatrix::from_entries(DMatrix::identity(4, 4)).unwrap();
        let rep = uniform_minimality_margin(&id).unwrap();
        assert!((rep.margin - 1.0).abs() < 1e-12);

        let sec = gaussian_section(&[(0.0, 0.0), (1.0, 1.0)]);
        let gm = gram_matrix(&sec).unwrap();
        let r = gaussian_overlap_modulus(1.0, 1.0);
        let rep = uniform_minimality_margin(&gm).unwrap();
        assert!((rep.margin - (1.0 - r * r).sqrt()).abs() < 1e-6);

        // nearly duplicated atoms: margin collapses
        let near = gaussian_section(&[(0.0, 0.0), (0.01, 0.0)]);
        let rep = uniform_minimality_margin(&gram_matrix(&near).unwrap()).unwrap();
        assert!(rep.margin < 0.1);

        // per-index identity: dist_n * ||h_n|| = 1 exactly
        let sec3 = gaussian_section(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let gm3 = gram_matrix(&sec3).unwrap();
        let eigen = gm3.eigen();
        let inv = inverse_from_eigen(&eigen, None);
        for i in 0..3 {
            let dist = 1.0 / inv[(i, i)].re.sqrt();
            let dual_norm = inv[(i, i)].re.sqrt();
            assert_relative_eq!(dist * dual_norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn singular_gram_margin_zero() {
        let mut m = DMatrix::<Complex64>::from_element(2, 2, Complex64::new(1.0, 0.0));
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        let gm = GramMatrix::from_entries(m).unwrap();
        let rep = uniform_minimality_margin(&gm).unwrap();
        assert!(!rep.minimal);
        assert_eq!(rep.margin, 0.0);
    }
}
