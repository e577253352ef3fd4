//! Run configurations and the batch runner.
//!
//! One JSON config per run; flags only override the output directory and
//! the seed. All inputs are validated before anything is written, outputs
//! are deterministic for a fixed config and seed, and a manifest lists
//! every artifact with the config hash (timestamps live only there).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gabden_core::frames::{gram_matrix, riesz_bounds, GaborSection};
use gabden_core::io;
use gabden_core::pointset::{density_profile, lattice_points, CountTarget, Cube, Lattice2D, PointFamily, PointSet};
use gabden_core::report::{Verdict, VerificationReport};
use gabden_core::signal::{make_preset, Preset, WeightExponent};
use gabden_core::stft::{sample_points_in_box, stft_field, GridRange, PhaseGrid, PhasePoint};
use gabden_core::verify::{
    centered_field, check_growth_envelope, commutation_report, covering_inequality_check,
    hap_radius, point_estimate_constant, shifted_dual_biorthogonality, verify_density_theorem,
    verify_uniform_minimality_density, CaseSpec, HapOutcome, Hypothesis, PointSource,
    QuadratureParams,
};
use gabden_core::Error as CoreError;

/// Exit codes: 0 pass, 1 usage/config, 2 hypothesis failure, 3 verification failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    ConfigError(String),
    HypothesisFailure,
    VerificationFailure,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::ConfigError(_) => 1,
            Outcome::HypothesisFailure => 2,
            Outcome::VerificationFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeConfig {
    pub center: [f64; 2],
    pub half_side: f64,
}

impl CubeConfig {
    fn cube(&self) -> Result<Cube, CoreError> {
        Cube::new((self.center[0], self.center[1]), self.half_side)
    }
}

/// Point sources accepted by configs; CSV paths resolve relative to the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PointsConfig {
    Csv { path: PathBuf },
    Lattice { v: [f64; 2], w: [f64; 2], window_half_side: f64 },
    Inline { points: Vec<[f64; 2]> },
    Family { members: Vec<PointsConfig> },
}

impl PointsConfig {
    fn resolve_set(&self, base: &Path) -> Result<PointSet, CoreError> {
        match self {
            PointsConfig::Csv { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                io::read_pointset_csv(&full)
            }
            PointsConfig::Lattice { v, w, window_half_side } => {
                let lat = Lattice2D::new((v[0], v[1]), (w[0], w[1]))?;
                lattice_points(&lat, &Cube::new((0.0, 0.0), *window_half_side)?)
            }
            PointsConfig::Inline { points } => PointSet::new(
                points.iter().map(|p| PhasePoint::new(p[0], p[1])).collect(),
                None,
            ),
            PointsConfig::Family { .. } => Err(CoreError::invalid(
                "points",
                "a family is not a single point set here",
            )),
        }
    }

    fn validate_paths(&self, base: &Path) -> Result<(), String> {
        match self {
            PointsConfig::Csv { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                if full.is_file() {
                    Ok(())
                } else {
                    Err(format!("point-set file not found: {}", full.display()))
                }
            }
            PointsConfig::Family { members } => {
                members.iter().try_for_each(|m| m.validate_paths(base))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StftJob {
    pub generator: Preset,
    pub x: GridRange,
    pub y: GridRange,
    #[serde(default)]
    pub quadrature: QuadratureParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityJob {
    pub points: PointsConfig,
    pub radii: Vec<f64>,
    pub search_region: CubeConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsJob {
    pub generators: Vec<Preset>,
    pub points: PointsConfig,
    pub cube: CubeConfig,
    #[serde(default)]
    pub quadrature: QuadratureParams,
}

/// One verification case; `check` picks the harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseConfig {
    pub name: String,
    #[serde(flatten)]
    pub check: CheckConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckConfig {
    DensityTheorem {
        generators: Vec<Preset>,
        points: PointsConfig,
        search_region: CubeConfig,
        radii: Vec<f64>,
        hypothesis: Hypothesis,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        quadrature: QuadratureParams,
    },
    UniformMinimality {
        generator: Preset,
        points: PointsConfig,
        search_region: CubeConfig,
        radii: Vec<f64>,
        epsilons: Vec<f64>,
        #[serde(default)]
        quadrature: QuadratureParams,
    },
    Covariance {
        generator: Preset,
        shift: [f64; 2],
        samples: usize,
        sample_half: f64,
    },
    TraceIdentity {
        generator: Preset,
        points: PointsConfig,
        section_cube: CubeConfig,
        quad_box: CubeConfig,
        quad_step: f64,
    },
    BiorthogonalSum {
        generator: Preset,
        points: PointsConfig,
        section_cube: CubeConfig,
        grid_half: f64,
        grid_step: f64,
    },
    Commutation {
        generator: Preset,
        pairs: Vec<[f64; 2]>,
    },
    LatticeBiorthogonality {
        generator: Preset,
        dual: Preset,
        v: [f64; 2],
        w: [f64; 2],
        index_window: i64,
        tolerance: f64,
    },
    GrowthEnvelope {
        generator: Preset,
        alpha: f64,
        radii: Vec<f64>,
    },
    Covering {
        generator: Preset,
        points: PointsConfig,
        cube: CubeConfig,
        delta: f64,
        samples: usize,
        sample_half: f64,
    },
    /// Homogeneous-approximation radius search; `expect_found` states the
    /// anticipated outcome (dense sets approximate, sparse ones plateau).
    Hap {
        generator: Preset,
        points: PointsConfig,
        epsilon: f64,
        probes: Vec<[f64; 2]>,
        expect_found: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyJob {
    pub cases: Vec<CaseConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJob {
    pub input_dir: PathBuf,
}

/// Top-level run configuration; the command selects one section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub stft: Option<StftJob>,
    #[serde(default)]
    pub density: Option<DensityJob>,
    #[serde(default)]
    pub bounds: Option<BoundsJob>,
    #[serde(default)]
    pub verify: Option<VerifyJob>,
    #[serde(default)]
    pub report: Option<ReportJob>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stft,
    Density,
    Bounds,
    Verify,
    Report,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_sha256: String,
    command: &'a str,
    created_unix_ms: u128,
    artifacts: Vec<String>,
}

pub struct RunOutput {
    pub outcome: Outcome,
    pub artifacts: Vec<PathBuf>,
}

/// Execute one command against a config file.
pub fn run(command: Command, config_path: &Path, out_override: Option<&Path>, seed_override: Option<u64>) -> RunOutput {
    let raw = match std::fs::read_to_string(config_path) {
        Ok(r) => r,
        Err(e) => return fail_config(format!("cannot read config {}: {e}", config_path.display())),
    };
    let config: RunConfig = match serde_json::from_str(&raw) {
        Ok(c) => c,
        Err(e) => return fail_config(format!("config parse error: {e}")),
    };
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone().map(|d| if d.is_absolute() { d } else { base.join(d) }))
        .unwrap_or_else(|| base.join("out"));
    let seed = seed_override.or(config.seed).unwrap_or(0);

    // validate all inputs before writing anything
    if let Err(msg) = validate(command, &config, &base) {
        return fail_config(msg);
    }
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail_config(format!("cannot create output directory: {e}"));
    }

    let result = match command {
        Command::Stft => run_stft(config.stft.as_ref().unwrap(), &out_dir),
        Command::Density => run_density(config.density.as_ref().unwrap(), &base, &out_dir),
        Command::Bounds => run_bounds(config.bounds.as_ref().unwrap(), &base, &out_dir),
        Command::Verify => run_verify(config.verify.as_ref().unwrap(), &base, &out_dir, seed),
        Command::Report => run_report(config.report.as_ref().unwrap(), &base, &out_dir),
    };

    match result {
        Ok((outcome, mut artifacts)) => {
            let manifest = Manifest {
                config_sha256: hex_digest(&raw),
                command: command_name(command),
                created_unix_ms: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
            };
            let mpath = out_dir.join("manifest.json");
            if let Err(e) = std::fs::write(&mpath, serde_json::to_string_pretty(&manifest).unwrap()) {
                return fail_config(format!("cannot write manifest: {e}"));
            }
            artifacts.push(mpath);
            RunOutput { outcome, artifacts }
        }
        Err(e) => outcome_from_error(e),
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Stft => "stft",
        Command::Density => "density",
        Command::Bounds => "bounds",
        Command::Verify => "verify",
        Command::Report => "report",
    }
}

fn fail_config(msg: String) -> RunOutput {
    RunOutput { outcome: Outcome::ConfigError(msg), artifacts: vec![] }
}

fn outcome_from_error(e: CoreError) -> RunOutput {
    let outcome = match e {
        CoreError::HypothesisFailure { .. } | CoreError::EpsilonTooLarge { .. } => Outcome::HypothesisFailure,
        CoreError::InvalidParameter { .. } | CoreError::Io(_) | CoreError::Json(_) | CoreError::Csv(_) => {
            Outcome::ConfigError(e.to_string())
        }
        _ => Outcome::VerificationFailure,
    };
    RunOutput { outcome, artifacts: vec![] }
}

fn validate(command: Command, config: &RunConfig, base: &Path) -> Result<(), String> {
    let missing = |what: &str| Err(format!("config has no `{what}` section"));
    match command {
        Command::Stft => {
            if config.stft.is_none() {
                return missing("stft");
            }
        }
        Command::Density => match &config.density {
            None => return missing("density"),
            Some(j) => j.points.validate_paths(base)?,
        },
        Command::Bounds => match &config.bounds {
            None => return missing("bounds"),
            Some(j) => j.points.validate_paths(base)?,
        },
        Command::Verify => match &config.verify {
            None => return missing("verify"),
            Some(j) => {
                if j.cases.is_empty() {
                    return Err("verify.cases is empty".into());
                }
                for case in &j.cases {
                    case_points(&case.check).map_or(Ok(()), |p| p.validate_paths(base))?;
                }
            }
        },
        Command::Report => match &config.report {
            None => return missing("report"),
            Some(j) => {
                let dir = if j.input_dir.is_absolute() { j.input_dir.clone() } else { base.join(&j.input_dir) };
                if !dir.is_dir() {
                    return Err(format!("report input_dir not found: {}", dir.display()));
                }
            }
        },
    }
    Ok(())
}

fn case_points(check: &CheckConfig) -> Option<&PointsConfig> {
    match check {
        CheckConfig::DensityTheorem { points, .. }
        | CheckConfig::UniformMinimality { points, .. }
        | CheckConfig::TraceIdentity { points, .. }
        | CheckConfig::BiorthogonalSum { points, .. }
        | CheckConfig::Covering { points, .. } => Some(points),
        _ => None,
    }
}

fn run_stft(job: &StftJob, out_dir: &Path) -> Result<(Outcome, Vec<PathBuf>), CoreError> {
    let grid = job.quadrature.time_grid()?;
    let g = make_preset(&job.generator, &grid)?;
    let field = stft_field(&g, &PhaseGrid::new(job.x, job.y))?;
    let csv = out_dir.join("field.csv");
    let json = out_dir.join("field.json");
    let sig = out_dir.join("signal.csv");
    io::write_field_csv(&csv, &field)?;
    io::write_field_json(&json, &field)?;
    io::write_signal_csv(&sig, &g)?;
    Ok((Outcome::Pass, vec![csv, json, sig]))
}

fn run_density(job: &DensityJob, base: &Path, out_dir: &Path) -> Result<(Outcome, Vec<PathBuf>), CoreError> {
    let search = job.search_region.cube()?;
    let report = match &job.points {
        PointsConfig::Family { members } => {
            let sets = members
                .iter()
                .map(|m| m.resolve_set(base))
                .collect::<Result<Vec<_>, _>>()?;
            let fam = PointFamily::new(sets)?;
            density_profile(CountTarget::Family(&fam), &job.radii, &search)?
        }
        other => {
            let ps = other.resolve_set(base)?;
            density_profile(CountTarget::Set(&ps), &job.radii, &search)?
        }
    };
    let csv = out_dir.join("density.csv");
    let json = out_dir.join("density.json");
    io::write_density_csv(&csv, &report)?;
    io::write_json(&json, &report)?;
    Ok((Outcome::Pass, vec![csv, json]))
}

fn run_bounds(job: &BoundsJob, base: &Path, out_dir: &Path) -> Result<(Outcome, Vec<PathBuf>), CoreError> {
    let grid = job.quadrature.time_grid()?;
    let cube = job.cube.cube()?;
    let ps = job.points.resolve_set(base)?;
    let mut generators = Vec::new();
    let mut atoms = Vec::new();
    for (gi, preset) in job.generators.iter().enumerate() {
        generators.push(make_preset(preset, &grid)?);
        for p in ps.points().iter().filter(|p| cube.contains(p)) {
            atoms.push(gabden_core::frames::GaborAtomRef {
                generator_index: gi,
                lambda: p.x,
                mu: p.y,
            });
        }
    }
    let section = GaborSection::new(generators, atoms)?;
    let gm = gram_matrix(&section)?;
    let bounds = riesz_bounds(&gm)?;
    let json = out_dir.join("bounds.json");
    io::write_json(&json, &bounds)?;
    Ok((Outcome::Pass, vec![json]))
}

fn run_case(case: &CaseConfig, base: &Path, seed: u64) -> Result<VerificationReport, CoreError> {
    match &case.check {
        CheckConfig::DensityTheorem { generators, points, search_region, radii, hypothesis, alpha, quadrature } => {
            let spec = CaseSpec {
                name: case.name.clone(),
                generators: generators.clone(),
                points: to_point_source(points, base)?,
                search_region: search_region.cube()?,
                radii: radii.clone(),
                hypothesis: *hypothesis,
                alpha: *alpha,
                seed,
                quadrature: *quadrature,
            };
            verify_density_theorem(&spec)
        }
        CheckConfig::UniformMinimality { generator, points, search_region, radii, epsilons, quadrature } => {
            let spec = CaseSpec {
                name: case.name.clone(),
                generators: vec![*generator],
                points: to_point_source(points, base)?,
                search_region: search_region.cube()?,
                radii: radii.clone(),
                hypothesis: Hypothesis::UniformlyMinimal,
                alpha: None,
                seed,
                quadrature: *quadrature,
            };
            verify_uniform_minimality_density(&spec, epsilons)
        }
        CheckConfig::Covariance { generator, shift, samples, sample_half } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let pts = sample_points_in_box(*samples, *sample_half, seed);
            gabden_core::stft::check_covariance(&g, PhasePoint::new(shift[0], shift[1]), &pts)
        }
        CheckConfig::TraceIdentity { generator, points, section_cube, quad_box, quad_step } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let ps = points.resolve_set(base)?;
            let section = GaborSection::from_points(g, &ps, Some(&section_cube.cube()?))?;
            gabden_core::frames::trace_identity_check(&section, &quad_box.cube()?, *quad_step)
        }
        CheckConfig::BiorthogonalSum { generator, points, section_cube, grid_half, grid_step } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let ps = points.resolve_set(base)?;
            let section = GaborSection::from_points(g, &ps, Some(&section_cube.cube()?))?;
            let duals = gabden_core::frames::dual_system(&section)?;
            let pg = PhaseGrid::centered(*grid_half, *grid_step)?;
            gabden_core::frames::biorthogonal_sum_field(&section, &duals, &pg)
        }
        CheckConfig::Commutation { generator, pairs } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let pairs: Vec<(f64, f64)> = pairs.iter().map(|p| (p[0], p[1])).collect();
            commutation_report(&g, &pairs)
        }
        CheckConfig::LatticeBiorthogonality { generator, dual, v, w, index_window, tolerance } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let h = make_preset(dual, &grid)?;
            let lat = Lattice2D::new((v[0], v[1]), (w[0], w[1]))?;
            shifted_dual_biorthogonality(&lat, &g, &h, *index_window, *tolerance)
        }
        CheckConfig::GrowthEnvelope { generator, alpha, radii } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            check_growth_envelope(&g, &WeightExponent::new(*alpha)?, radii)
        }
        CheckConfig::Covering { generator, points, cube, delta, samples, sample_half } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let ps = points.resolve_set(base)?;
            let field = centered_field(&g, 8.0, 0.1)?;
            let est = point_estimate_constant(*delta, 100, seed)?;
            let pts = sample_points_in_box(*samples, *sample_half, seed.wrapping_add(1));
            covering_inequality_check(&ps, &field, &cube.cube()?, est.safe_constant(), &pts)
        }
        CheckConfig::Hap { generator, points, epsilon, probes, expect_found } => {
            let grid = QuadratureParams::default().time_grid()?;
            let g = make_preset(generator, &grid)?;
            let ps = points.resolve_set(base)?;
            let pts: Vec<PhasePoint> = probes.iter().map(|p| PhasePoint::new(p[0], p[1])).collect();
            let outcome = hap_radius(&g, &ps, *epsilon, &pts)?;
            let mut report = VerificationReport::new("hap_radius");
            report
                .input("epsilon", epsilon.to_string())
                .input("probes", pts.len().to_string())
                .input("expect_found", expect_found.to_string());
            match outcome {
                HapOutcome::Found { radius } => {
                    report.measure("radius", radius);
                    report.check(if *expect_found { 1.0 } else { -1.0 }, 0.0);
                }
                HapOutcome::NotFound { best_error_sq } => {
                    report.measure("best_error_sq", best_error_sq);
                    report.check(if *expect_found { -1.0 } else { 1.0 }, 0.0);
                }
            }
            Ok(report)
        }
    }
}

fn to_point_source(points: &PointsConfig, base: &Path) -> Result<PointSource, CoreError> {
    Ok(match points {
        PointsConfig::Lattice { v, w, window_half_side: _ } => PointSource::Lattice {
            lattice: Lattice2D::new((v[0], v[1]), (w[0], w[1]))?,
        },
        PointsConfig::Family { members } => PointSource::Family {
            members: members
                .iter()
                .map(|m| m.resolve_set(base))
                .collect::<Result<Vec<_>, _>>()?,
        },
        other => PointSource::Set { points: other.resolve_set(base)? },
    })
}

#[derive(Serialize)]
struct VerifySummary {
    cases: Vec<CaseOutcome>,
    all_pass: bool,
}

#[derive(Serialize)]
struct CaseOutcome {
    name: String,
    check: String,
    verdict: Verdict,
    pass: bool,
    margin: f64,
}

fn run_verify(job: &VerifyJob, base: &Path, out_dir: &Path, seed: u64) -> Result<(Outcome, Vec<PathBuf>), CoreError> {
    let mut artifacts = Vec::new();
    let mut outcomes = Vec::new();
    let mut any_hypothesis = false;
    let mut any_fail = false;
    for case in &job.cases {
        let report = run_case(case, base, seed)?;
        let path = out_dir.join(format!("case_{}.json", sanitize(&case.name)));
        std::fs::write(&path, report.to_json()?)?;
        artifacts.push(path);
        match report.verdict {
            Verdict::HypothesisFailure => any_hypothesis = true,
            Verdict::ToleranceFailure => any_fail = true,
            Verdict::Pass => {}
        }
        outcomes.push(CaseOutcome {
            name: case.name.clone(),
            check: report.name.clone(),
            verdict: report.verdict,
            pass: report.pass,
            margin: report.margin,
        });
    }
    let summary = VerifySummary { all_pass: !any_hypothesis && !any_fail, cases: outcomes };
    let spath = out_dir.join("summary.json");
    std::fs::write(&spath, serde_json::to_string_pretty(&summary)?)?;
    artifacts.push(spath);
    let outcome = if any_hypothesis {
        Outcome::HypothesisFailure
    } else if any_fail {
        Outcome::VerificationFailure
    } else {
        Outcome::Pass
    };
    Ok((outcome, artifacts))
}

fn run_report(job: &ReportJob, base: &Path, out_dir: &Path) -> Result<(Outcome, Vec<PathBuf>), CoreError> {
    let dir = if job.input_dir.is_absolute() { job.input_dir.clone() } else { base.join(&job.input_dir) };
    let mut rows = Vec::new();
    let mut names: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("case_") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .collect();
    names.sort();
    for path in &names {
        let report: VerificationReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        println!(
            "{}: {} (margin {:.3e})",
            report.name,
            if report.pass { "PASS" } else { "FAIL" },
            report.margin
        );
        rows.push(format!("{},{},{}", report.name, report.pass, report.margin));
    }
    let csv = out_dir.join("summary.csv");
    std::fs::write(&csv, format!("check,pass,margin\n{}\n", rows.join("\n")))?;
    Ok((Outcome::Pass, vec![csv]))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn hex_digest(raw: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(raw.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
