//! The `count`, `verify`, and `explore` subcommands.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use num_complex::Complex;
use serde::Serialize;

use thetalab::divisor::{verify_bounds, BoundsVerdict, ThetaDivisor, Thresholds};
use thetalab::families::{find_on_theta, product_tau, random_siegel};
use thetalab::jacobian::SquareRootReport;
use thetalab::theta::{
    second_order_coords, theta, theta_eval, theta_gradient, theta_with_radius, HalfCharacteristic,
};
use thetalab::torsion::{all_points, TorsionPoint};
use thetalab::{CountReport64, RiemannMatrix64};

use crate::config::{load_tau_file, parse_complex_list, validate_eps, CliError, TranslateSpec};
use crate::exit;

type C = Complex<f64>;

// ---------------------------------------------------------------------------
// count
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone)]
pub struct CountArgs {
    /// Seeded random period matrix (requires --g)
    #[arg(long, conflicts_with_all = ["product", "tau_file"])]
    pub random: bool,

    /// Genus for the random family
    #[arg(long)]
    pub g: Option<usize>,

    /// Seed for the random family
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Eigenvalue floor for Im tau in the random family
    #[arg(long, default_value_t = 0.2)]
    pub min_eig: f64,

    /// Product of elliptic curves: comma-separated periods, e.g. "i,2i"
    #[arg(long, conflicts_with = "tau_file")]
    pub product: Option<String>,

    /// Load the period matrix from a JSON file {"g":..,"re":[[..]],"im":[[..]]}
    #[arg(long)]
    pub tau_file: Option<PathBuf>,

    /// Translate: zero | torsion:<index> | through:<seed>:<index> | vec:<c1,c2,...>
    #[arg(long, default_value = "zero")]
    pub translate: String,

    /// Absolute series tolerance, in [1e-13, 1e-3]
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,

    /// On-threshold for normalized residuals
    #[arg(long, default_value_t = 1e-8)]
    pub theta_on: f64,

    /// Off-threshold for normalized residuals
    #[arg(long, default_value_t = 1e-5)]
    pub theta_off: f64,

    /// Assert that the translate is symmetric (half-period translates are
    /// detected automatically)
    #[arg(long)]
    pub symmetric: bool,

    /// Assert that the theta divisor is irreducible, enabling the stronger
    /// count bound for non-symmetric translates
    #[arg(long)]
    pub irreducible: bool,

    /// Write the full report as JSON
    #[arg(long)]
    pub json_out: Option<PathBuf>,

    /// Append a CSV row (header is written when the file is new)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Everything `count` knows at the end of a run.
#[derive(Serialize)]
pub struct CountRecord {
    pub g: usize,
    pub family: String,
    pub seed: Option<u64>,
    pub translate_kind: String,
    pub translate_index: Option<usize>,
    pub translate: Vec<[f64; 2]>,
    pub n_on: usize,
    pub n_off: usize,
    pub n_uncertain: usize,
    pub bound_thm1: u64,
    pub bound_thm2: u64,
    pub hyperplane_rank: usize,
    pub thm1_ok: bool,
    pub thm2_applicable: bool,
    pub thm2_ok: bool,
    pub sound: bool,
    pub noneffective_lower_bound: u64,
    pub n_noneffective: usize,
    pub scale: f64,
    pub eps: f64,
    pub theta_on: f64,
    pub theta_off: f64,
    pub on_indices: Vec<usize>,
    pub uncertain_indices: Vec<usize>,
    pub notes: String,
}

pub struct ResolvedFamily {
    pub tau: RiemannMatrix64,
    pub family: String,
    pub seed: Option<u64>,
}

pub fn resolve_family(args: &CountArgs) -> Result<ResolvedFamily, CliError> {
    if let Some(path) = &args.tau_file {
        return Ok(ResolvedFamily {
            tau: load_tau_file(path)?,
            family: "file".into(),
            seed: None,
        });
    }
    if let Some(list) = &args.product {
        let taus = parse_complex_list(list)?;
        let tau = product_tau(&taus).map_err(|e| CliError::usage(e.to_string()))?;
        return Ok(ResolvedFamily {
            tau,
            family: "product".into(),
            seed: None,
        });
    }
    if args.random {
        let g = args
            .g
            .ok_or_else(|| CliError::usage("--random requires --g"))?;
        let tau = random_siegel(g, args.seed, args.min_eig)
            .map_err(|e| CliError::usage(e.to_string()))?;
        return Ok(ResolvedFamily {
            tau,
            family: "random".into(),
            seed: Some(args.seed),
        });
    }
    Err(CliError::usage(
        "no period matrix: pass --random --g <G>, --product <LIST>, or --tau-file <PATH>",
    ))
}

/// Turn a translate spec into the complex vector `a`.
pub fn resolve_translate(
    spec: &TranslateSpec,
    tau: &RiemannMatrix64,
    eps: f64,
) -> Result<Vec<C>, CliError> {
    let g = tau.g();
    match spec {
        TranslateSpec::Zero => Ok(vec![C::new(0.0, 0.0); g]),
        TranslateSpec::Torsion(index) => {
            let point =
                TorsionPoint::from_index(g, *index).map_err(|e| CliError::usage(e.to_string()))?;
            Ok(point.embed(tau)?)
        }
        TranslateSpec::ThroughTorsion { seed, index } => {
            let point =
                TorsionPoint::from_index(g, *index).map_err(|e| CliError::usage(e.to_string()))?;
            let zero = find_on_theta(tau, *seed, eps)?;
            let emb = point.embed(tau)?;
            Ok(zero.point.iter().zip(&emb).map(|(&w, &x)| w - x).collect())
        }
        TranslateSpec::Explicit(v) => {
            if v.len() != g {
                return Err(CliError::usage(format!(
                    "translate vector has {} components, expected {g}",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
    }
}

pub fn run_count_inner(args: &CountArgs) -> Result<(CountRecord, i32), CliError> {
    let eps = validate_eps(args.eps)?;
    let thresholds = Thresholds::new(args.theta_on, args.theta_off)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let spec = TranslateSpec::parse(&args.translate)?;
    let fam = resolve_family(args)?;
    let g = fam.tau.g();
    if let Some(idx) = spec.index() {
        if idx >= 1usize << (2 * g) {
            return Err(CliError::usage(format!(
                "torsion index {idx} out of range for g = {g}"
            )));
        }
    }
    let a = resolve_translate(&spec, &fam.tau, eps)?;
    let divisor = ThetaDivisor::new(&fam.tau, eps)?;
    let mut report = divisor.count_on_translate(&a, &thresholds)?;
    report.tau_desc = format!("{} g={g}", fam.family);
    let symmetric = args.symmetric || spec.is_half_period();
    let verdict = verify_bounds(&report, symmetric, args.irreducible);
    let sqrt_report = SquareRootReport::from_count(&report);
    let record = CountRecord {
        g,
        family: fam.family,
        seed: fam.seed,
        translate_kind: spec.kind().into(),
        translate_index: spec.index(),
        translate: a.iter().map(|c| [c.re, c.im]).collect(),
        n_on: report.n_on,
        n_off: report.n_off,
        n_uncertain: report.n_uncertain,
        bound_thm1: report.bound_thm1,
        bound_thm2: report.bound_thm2,
        hyperplane_rank: report.hyperplane_rank,
        thm1_ok: verdict.thm1_ok,
        thm2_applicable: verdict.thm2_applicable,
        thm2_ok: verdict.thm2_ok,
        sound: verdict.sound,
        noneffective_lower_bound: sqrt_report.lower_bound,
        n_noneffective: sqrt_report.n_noneffective,
        scale: divisor.scale(),
        eps,
        theta_on: args.theta_on,
        theta_off: args.theta_off,
        on_indices: report.on_indices.clone(),
        uncertain_indices: report.uncertain_indices.clone(),
        notes: report.notes.clone(),
    };
    let code = count_exit_code(&verdict, report.n_uncertain);
    Ok((record, code))
}

fn count_exit_code(verdict: &BoundsVerdict, n_uncertain: usize) -> i32 {
    if !verdict.passed() {
        exit::VIOLATION
    } else if n_uncertain > 0 {
        exit::CONDITIONAL
    } else {
        exit::OK
    }
}

pub fn run_count(args: &CountArgs) -> Result<i32, CliError> {
    let (record, code) = run_count_inner(args)?;
    println!(
        "g={} family={} translate={}{} n_on={} n_off={} n_uncertain={} bound1={} bound2={} rank={} sound={}",
        record.g,
        record.family,
        record.translate_kind,
        record
            .translate_index
            .map(|i| format!(":{i}"))
            .unwrap_or_default(),
        record.n_on,
        record.n_off,
        record.n_uncertain,
        record.bound_thm1,
        record.bound_thm2,
        record.hyperplane_rank,
        record.sound,
    );
    if let Some(path) = &args.json_out {
        let json =
            serde_json::to_string_pretty(&record).map_err(|e| CliError::runtime(e.to_string()))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &args.csv {
        append_csv_row(path, &csv_row(&record))?;
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// CSV schema
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "g,family,seed,translate_kind,translate_index,n_on,n_off,n_uncertain,bound_thm1,bound_thm2,hyperplane_rank,sound";

pub fn csv_row(r: &CountRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.g,
        r.family,
        r.seed.map(|s| s.to_string()).unwrap_or_default(),
        r.translate_kind,
        r.translate_index.map(|i| i.to_string()).unwrap_or_default(),
        r.n_on,
        r.n_off,
        r.n_uncertain,
        r.bound_thm1,
        r.bound_thm2,
        r.hyperplane_rank,
        r.sound,
    )
}

fn append_csv_row(path: &PathBuf, row: &str) -> Result<(), CliError> {
    let fresh = !path.exists()
        || std::fs::metadata(path)
            .map(|m| m.len() == 0)
            .unwrap_or(true);
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
    if fresh {
        writeln!(file, "{CSV_HEADER}").map_err(|e| CliError::runtime(e.to_string()))?;
    }
    writeln!(file, "{row}").map_err(|e| CliError::runtime(e.to_string()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// all | parity | addition | gradient | spanning | hyperplane | plane |
    /// symmetry | errbound
    #[arg(long, default_value = "all")]
    pub check: String,

    /// Restrict to one genus (default: sweep 1..=3)
    #[arg(long)]
    pub g: Option<usize>,

    /// Number of seeded random period matrices per genus
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,

    /// Base seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Random samples per period matrix for pointwise identities
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// Restrict the spanning check to one coset
    #[arg(long)]
    pub coset: Option<u32>,

    /// Absolute series tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
}

struct CheckLine {
    name: &'static str,
    detail: String,
    pass: bool,
}

/// Splitmix-style generator for the verify sampling; deterministic per seed.
struct Sampler(u64);

impl Sampler {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn centered(&mut self, w: f64) -> f64 {
        (self.unit() - 0.5) * 2.0 * w
    }

    fn cvec(&mut self, g: usize, re_w: f64, im_w: f64) -> Vec<C> {
        (0..g)
            .map(|_| C::new(self.centered(re_w), self.centered(im_w)))
            .collect()
    }
}

pub fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    validate_eps(args.eps)?;
    let genera: Vec<usize> = match args.g {
        Some(g) if (1..=6).contains(&g) => vec![g],
        Some(g) => return Err(CliError::usage(format!("--g {g} out of range 1..=6"))),
        None => vec![1, 2, 3],
    };
    let known = [
        "all",
        "parity",
        "addition",
        "gradient",
        "spanning",
        "hyperplane",
        "plane",
        "symmetry",
        "errbound",
    ];
    if !known.contains(&args.check.as_str()) {
        return Err(CliError::usage(format!(
            "unknown check '{}' (expected one of {})",
            args.check,
            known.join("|")
        )));
    }
    let want = |name: &str| args.check == "all" || args.check == name;
    let mut lines: Vec<CheckLine> = Vec::new();

    if want("parity") {
        lines.push(check_parity(args, &genera)?);
    }
    if want("addition") {
        lines.push(check_addition(args, &genera)?);
    }
    if want("gradient") {
        lines.push(check_gradient(args, &genera)?);
    }
    if want("spanning") {
        lines.push(check_spanning(args, &genera)?);
    }
    if want("hyperplane") {
        lines.push(check_hyperplane(args, &genera)?);
    }
    if want("plane") {
        lines.push(check_plane(args, &genera)?);
    }
    if want("symmetry") {
        lines.push(check_symmetry(args, &genera)?);
    }
    if want("errbound") {
        lines.push(check_errbound(args, &genera)?);
    }

    let mut all_pass = true;
    for line in &lines {
        println!(
            "{:<10} {}  {}",
            line.name,
            line.detail,
            if line.pass { "PASS" } else { "FAIL" }
        );
        all_pass &= line.pass;
    }
    Ok(if all_pass { exit::OK } else { exit::VIOLATION })
}

fn check_parity(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let mut worst = 0.0f64;
    for &g in genera {
        for s in 0..args.seeds {
            let tau = random_siegel(g, args.seed + s, 0.2)?;
            let div = ThetaDivisor::new(&tau, args.eps)?;
            for (idx, t) in div.constants().iter().enumerate() {
                let chr = HalfCharacteristic::from_index(g, idx)?;
                if chr.is_odd() {
                    worst = worst.max(t.value.norm() / div.scale());
                }
            }
        }
    }
    Ok(CheckLine {
        name: "parity",
        detail: format!("max odd-constant residual {worst:.3e}"),
        pass: worst <= 1e-10,
    })
}

fn check_addition(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let mut sampler = Sampler(args.seed.wrapping_mul(2654435761).wrapping_add(1));
    let mut worst = 0.0f64;
    let taus_per_g = args.seeds.min(10);
    for &g in genera {
        let chr = HalfCharacteristic::zero(g);
        for s in 0..taus_per_g {
            let tau = random_siegel(g, args.seed + 100 + s, 0.2)?;
            for _ in 0..args.n {
                let z = sampler.cvec(g, 0.6, 0.3);
                let w = sampler.cvec(g, 0.6, 0.3);
                let zpw: Vec<C> = z.iter().zip(&w).map(|(&u, &v)| u + v).collect();
                let zmw: Vec<C> = z.iter().zip(&w).map(|(&u, &v)| u - v).collect();
                let lhs = theta(&zpw, &tau, &chr, args.eps)?.value
                    * theta(&zmw, &tau, &chr, args.eps)?.value;
                let cz = second_order_coords(&z, &tau, args.eps)?;
                let cw = second_order_coords(&w, &tau, args.eps)?;
                let mut rhs = C::new(0.0, 0.0);
                for e in 0..cz.len() {
                    rhs += cz[e].value * cw[e].value;
                }
                worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
            }
        }
    }
    Ok(CheckLine {
        name: "addition",
        detail: format!("max residual {worst:.3e}"),
        pass: worst <= 1e-9,
    })
}

fn check_gradient(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let mut sampler = Sampler(args.seed.wrapping_mul(0x9e3779b9).wrapping_add(7));
    let h = 1e-5;
    let mut worst = 0.0f64;
    for &g in genera {
        let chr = HalfCharacteristic::zero(g);
        for s in 0..args.seeds.min(5) {
            let tau = random_siegel(g, args.seed + 200 + s, 0.2)?;
            let z = sampler.cvec(g, 0.25, 0.15);
            let grad = theta_gradient(&z, &tau, &chr, args.eps.min(1e-12))?;
            for (j, gj) in grad.iter().enumerate() {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += C::new(h, 0.0);
                zm[j] -= C::new(h, 0.0);
                let fd = (theta(&zp, &tau, &chr, 1e-13)?.value
                    - theta(&zm, &tau, &chr, 1e-13)?.value)
                    / C::new(2.0 * h, 0.0);
                let denom = gj.value.norm().max(1e-3);
                worst = worst.max((gj.value - fd).norm() / denom);
            }
        }
    }
    Ok(CheckLine {
        name: "gradient",
        detail: format!("max relative deviation {worst:.3e}"),
        pass: worst <= 1e-6,
    })
}

fn check_spanning(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let mut worst_ratio = f64::INFINITY;
    let mut pass = true;
    for &g in genera {
        let cosets: Vec<u32> = match args.coset {
            Some(b) if b < (1u32 << g) => vec![b],
            Some(b) => {
                return Err(CliError::usage(format!(
                    "coset {b} out of range for g = {g}"
                )))
            }
            None => (0..1u32 << g).collect(),
        };
        for s in 0..args.seeds {
            let tau = random_siegel(g, args.seed + 300 + s, 0.2)?;
            let div = ThetaDivisor::new(&tau, args.eps)?;
            for &b in &cosets {
                let rep = div.spanning_check(b)?;
                worst_ratio = worst_ratio.min(rep.min_singular_ratio);
                pass &= rep.pass;
            }
        }
    }
    Ok(CheckLine {
        name: "spanning",
        detail: format!("min singular ratio {worst_ratio:.3e}"),
        pass,
    })
}

fn check_hyperplane(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    // On points of the zero translate lie on the hyperplane cut out by the
    // theta constants of 2Theta; the coordinate matrix rank is at most
    // 2^g - 1.
    let thr = Thresholds::default();
    let mut worst = 0.0f64;
    let mut pass = true;
    for &g in genera {
        for s in 0..args.seeds.min(10) {
            let tau = random_siegel(g, args.seed + 400 + s, 0.2)?;
            let div = ThetaDivisor::new(&tau, args.eps)?;
            let a = vec![C::new(0.0, 0.0); g];
            let on: Vec<TorsionPoint> = all_points(g)
                .filter(|p| {
                    div.classify(&a, p, &thr)
                        .map(|v| v.state == thetalab::divisor::MembershipState::On)
                        .unwrap_or(false)
                })
                .collect();
            let rep = div.hyperplane_check(&a, &on)?;
            worst = worst.max(rep.max_violation);
            pass &= rep.rank < (1 << g) && rep.max_violation <= 1e-8;
        }
    }
    Ok(CheckLine {
        name: "hyperplane",
        detail: format!("max violation {worst:.3e}"),
        pass,
    })
}

fn check_plane(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    // translates through a prescribed torsion point: the g+1 sections vanish
    // at every On point and the coordinate rank stays within 2^g - g - 1.
    let thr = Thresholds::default();
    let mut worst = 0.0f64;
    let mut pass = true;
    for &g in genera {
        if g < 2 {
            continue;
        }
        for s in 0..args.seeds.min(5) {
            let tau = random_siegel(g, args.seed + 500 + s, 0.2)?;
            let div = ThetaDivisor::new(&tau, args.eps)?;
            let x = TorsionPoint::from_index(g, (s as usize * 7 + 3) % (1 << (2 * g)))?;
            let zero = find_on_theta(&tau, args.seed + 900 + s, args.eps)?;
            let emb = x.embed(&tau)?;
            let a: Vec<C> = zero
                .point
                .iter()
                .zip(&emb)
                .map(|(&w, &xe)| w - xe)
                .collect();
            let on: Vec<TorsionPoint> = all_points(g)
                .filter(|p| {
                    div.classify(&a, p, &thr)
                        .map(|v| v.state == thetalab::divisor::MembershipState::On)
                        .unwrap_or(false)
                })
                .collect();
            if on.is_empty() {
                pass = false;
                continue;
            }
            let rep = div.plane_check(&a, &on)?;
            worst = worst.max(rep.max_section_residual);
            pass &= rep.pass && rep.max_section_residual <= 1e-6;
        }
    }
    Ok(CheckLine {
        name: "plane",
        detail: format!("max section residual {worst:.3e}"),
        pass,
    })
}

fn check_symmetry(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let thr = Thresholds::default();
    let mut sampler = Sampler(args.seed.wrapping_mul(0x2545f491).wrapping_add(3));
    let mut checked = 0usize;
    let mut pass = true;
    for &g in genera {
        for s in 0..args.seeds.min(10) {
            let tau = random_siegel(g, args.seed + 600 + s, 0.2)?;
            let div = ThetaDivisor::new(&tau, args.eps)?;
            let a = sampler.cvec(g, 0.5, 0.3);
            for x in all_points(g) {
                pass &= div.symmetry_crosscheck(&a, &x, &thr)?;
                checked += 1;
            }
        }
    }
    Ok(CheckLine {
        name: "symmetry",
        detail: format!("{checked} classifications crosschecked"),
        pass,
    })
}

fn check_errbound(args: &VerifyArgs, genera: &[usize]) -> Result<CheckLine, CliError> {
    let mut sampler = Sampler(args.seed.wrapping_mul(0x1b873593).wrapping_add(11));
    let mut worst = 0.0f64;
    let mut pass = true;
    for &g in genera {
        for s in 0..args.seeds.min(5) {
            let tau = random_siegel(g, args.seed + 700 + s, 0.2)?;
            for idx in [0usize, 1, (1 << (2 * g)) - 1] {
                let chr = HalfCharacteristic::from_index(g, idx)?;
                let z = sampler.cvec(g, 0.5, 0.3);
                let ev = theta_eval(&z, &tau, &chr, args.eps, false)?;
                let wide = theta_with_radius(&z, &tau, &chr, ev.radius * 2.0)?;
                let diff = (ev.value.value - wide.value).norm();
                pass &= diff <= ev.value.err;
                if ev.value.err > 0.0 {
                    worst = worst.max(diff / ev.value.err);
                }
            }
        }
    }
    Ok(CheckLine {
        name: "errbound",
        detail: format!("worst diff/err {worst:.3e}"),
        pass,
    })
}

// ---------------------------------------------------------------------------
// explore
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone)]
pub struct ExploreArgs {
    /// random | product
    #[arg(long, default_value = "random")]
    pub family: String,

    /// Genus for the random family
    #[arg(long)]
    pub g: Option<usize>,

    /// Number of sampled period matrices for the random family
    #[arg(long, default_value_t = 100)]
    pub samples: u64,

    /// Base seed; sample k uses seed + k
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Translate per sample: zero | torsion | through
    #[arg(long, default_value = "zero")]
    pub translate_mode: String,

    /// Largest genus for the product sweep
    #[arg(long, default_value_t = 4)]
    pub g_max: usize,

    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Absolute series tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,

    #[arg(long, default_value_t = 1e-8)]
    pub theta_on: f64,

    #[arg(long, default_value_t = 1e-5)]
    pub theta_off: f64,
}

/// Produce the CSV text for an explore run; deterministic per configuration.
pub fn explore_csv(args: &ExploreArgs) -> Result<String, CliError> {
    let eps = validate_eps(args.eps)?;
    let thresholds = Thresholds::new(args.theta_on, args.theta_off)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    match args.family.as_str() {
        "random" => {
            let g = args
                .g
                .ok_or_else(|| CliError::usage("--family random requires --g"))?;
            for k in 0..args.samples {
                let seed = args.seed + k;
                let tau = random_siegel(g, seed, 0.2)?;
                let div = ThetaDivisor::new(&tau, eps)?;
                let order = 1usize << (2 * g);
                let (spec, a) = match args.translate_mode.as_str() {
                    "zero" => (TranslateSpec::Zero, vec![C::new(0.0, 0.0); g]),
                    "torsion" => {
                        let idx = (k as usize * 5 + 1) % order;
                        let spec = TranslateSpec::Torsion(idx);
                        let a = resolve_translate(&spec, &tau, eps)?;
                        (spec, a)
                    }
                    "through" => {
                        let idx = (k as usize * 5 + 1) % order;
                        let spec = TranslateSpec::ThroughTorsion {
                            seed: seed ^ 0xabcd,
                            index: idx,
                        };
                        let a = resolve_translate(&spec, &tau, eps)?;
                        (spec, a)
                    }
                    other => {
                        return Err(CliError::usage(format!("unknown translate mode '{other}'")))
                    }
                };
                let report = div.count_on_translate(&a, &thresholds)?;
                let verdict = verify_bounds(&report, spec.is_half_period(), false);
                out.push_str(&explore_row(&report, "random", Some(seed), &spec, &verdict));
                out.push('\n');
            }
        }
        "product" => {
            if !(1..=6).contains(&args.g_max) {
                return Err(CliError::usage("--g-max out of range 1..=6"));
            }
            for g in 1..=args.g_max {
                let taus: Vec<C> = (0..g).map(|j| C::new(0.0, 1.0 + 0.5 * j as f64)).collect();
                let tau = product_tau(&taus)?;
                let div = ThetaDivisor::new(&tau, eps)?;
                let a = vec![C::new(0.0, 0.0); g];
                let report = div.count_on_translate(&a, &thresholds)?;
                let verdict = verify_bounds(&report, true, false);
                out.push_str(&explore_row(
                    &report,
                    "product",
                    None,
                    &TranslateSpec::Zero,
                    &verdict,
                ));
                out.push('\n');
            }
        }
        other => return Err(CliError::usage(format!("unknown family '{other}'"))),
    }
    Ok(out)
}

fn explore_row(
    report: &CountReport64,
    family: &str,
    seed: Option<u64>,
    spec: &TranslateSpec,
    verdict: &BoundsVerdict,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        report.g,
        family,
        seed.map(|s| s.to_string()).unwrap_or_default(),
        spec.kind(),
        spec.index().map(|i| i.to_string()).unwrap_or_default(),
        report.n_on,
        report.n_off,
        report.n_uncertain,
        report.bound_thm1,
        report.bound_thm2,
        report.hyperplane_rank,
        verdict.sound,
    )
}

pub fn run_explore(args: &ExploreArgs) -> Result<i32, CliError> {
    let csv = explore_csv(args)?;
    match &args.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_count_args() -> CountArgs {
        CountArgs {
            random: false,
            g: None,
            seed: 0,
            min_eig: 0.2,
            product: None,
            tau_file: None,
            translate: "zero".into(),
            eps: 1e-10,
            theta_on: 1e-8,
            theta_off: 1e-5,
            symmetric: false,
            irreducible: false,
            json_out: None,
            csv: None,
        }
    }

    #[test]
    fn count_product_i_2i_gives_seven() {
        let mut args = base_count_args();
        args.product = Some("i,2i".into());
        let (record, code) = run_count_inner(&args).unwrap();
        assert_eq!(record.n_on, 7);
        assert_eq!(record.n_uncertain, 0);
        assert_eq!(code, exit::OK);
    }

    #[test]
    fn count_random_g2_gives_six() {
        let mut args = base_count_args();
        args.random = true;
        args.g = Some(2);
        args.seed = 7;
        let (record, code) = run_count_inner(&args).unwrap();
        assert_eq!(record.n_on, 6);
        assert_eq!(code, exit::OK);
    }

    #[test]
    fn count_requires_a_family() {
        let args = base_count_args();
        assert!(matches!(run_count_inner(&args), Err(CliError::Usage(_))));
    }

    #[test]
    fn count_rejects_out_of_range_eps() {
        let mut args = base_count_args();
        args.product = Some("i".into());
        args.eps = 1e-20;
        assert!(matches!(run_count_inner(&args), Err(CliError::Usage(_))));
    }

    #[test]
    fn count_rejects_out_of_range_torsion_index() {
        let mut args = base_count_args();
        args.product = Some("i,2i".into());
        args.translate = "torsion:16".into();
        assert!(matches!(run_count_inner(&args), Err(CliError::Usage(_))));
    }

    #[test]
    fn explore_product_sweep_counts() {
        let args = ExploreArgs {
            family: "product".into(),
            g: None,
            samples: 0,
            seed: 0,
            translate_mode: "zero".into(),
            g_max: 3,
            out: None,
            eps: 1e-10,
            theta_on: 1e-8,
            theta_off: 1e-5,
        };
        let csv = explore_csv(&args).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        let n_on: Vec<&str> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(5).unwrap())
            .collect();
        assert_eq!(n_on, vec!["1", "7", "37"]);
    }

    #[test]
    fn explore_is_deterministic() {
        let args = ExploreArgs {
            family: "random".into(),
            g: Some(2),
            samples: 5,
            seed: 3,
            translate_mode: "torsion".into(),
            g_max: 4,
            out: None,
            eps: 1e-10,
            theta_on: 1e-8,
            theta_off: 1e-5,
        };
        let a = explore_csv(&args).unwrap();
        let b = explore_csv(&args).unwrap();
        assert_eq!(a, b);
    }
}
