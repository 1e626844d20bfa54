//! Batch front end: problem files in, JSON reports out.

use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::affine::{AffineSystem, ExtAffineElement};
use crate::depth_zero::{
    double_coset_count, endoscopic_datum, stabilizer, DepthZeroCharacter, EndoscopicDatum,
};
use crate::error::{Error, Result};
use crate::hecke::{HeckeAmbient, HeckeElement};
use crate::orbital::{dominant_regular_box, GPrimePrefactor, OrbitalSetup};
use crate::rootdata::{RootDatum, SurgeryMode, Vector, PRESETS};
use crate::scalars::{CycloField, CycloLaurent};
use crate::spectral::{CenterElement, DualTorusPoly, TransferPackage, TransferSetup};

pub const SCHEMA: &str = include_str!("../schema/problem.schema.json");
pub const TOOL: &str = "workbench";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "workbench",
    version,
    about = "Exact depth-zero endoscopy computations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the tasks of a problem file and print a JSON report.
    Run {
        file: std::path::PathBuf,
        #[arg(long, env = "WORKBENCH_THREADS")]
        threads: Option<usize>,
        /// Radius of the dominant regular box.
        #[arg(long, default_value_t = 3)]
        nu_box: i64,
        #[arg(long, value_enum, default_value_t = Normalization::PerW)]
        normalization: Normalization,
        #[arg(long)]
        no_timestamp: bool,
    },
    /// List the preset root data.
    Presets,
    /// Print the problem-file JSON schema.
    Schema,
}

/// `verbatim` keeps `+l` on the `G` side and `l'(t_nu)` for every coset;
/// `per-w` uses `-l` and `l'(t_{w~(nu)})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Verbatim,
    PerW,
}

impl Normalization {
    pub fn gprime(self) -> GPrimePrefactor {
        match self {
            Normalization::Verbatim => GPrimePrefactor::Uniform,
            Normalization::PerW => GPrimePrefactor::PerW,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub threads: usize,
    pub nu_box: i64,
    pub normalization: Normalization,
    pub timestamp: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: 1,
            nu_box: 3,
            normalization: Normalization::PerW,
            timestamp: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub root_datum: DatumInput,
    pub q: u64,
    #[serde(default)]
    pub characters: BTreeMap<String, Vec<i64>>,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DatumInput {
    Preset(String),
    Simple {
        rank: usize,
        simple_roots: Vec<Vector>,
        simple_coroots: Vec<Vector>,
    },
    Explicit {
        rank: usize,
        roots: Vec<Vector>,
        coroots: Vec<Vector>,
        simple: Vec<usize>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Exact(String),
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::Int(1)
    }
}

impl Coeff {
    fn value(&self) -> std::result::Result<BigRational, String> {
        match self {
            Coeff::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            Coeff::Exact(s) => {
                let (n, d) = s.split_once('/').unwrap_or((s, "1"));
                let n: BigInt = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad coefficient {s:?}"))?;
                let d: BigInt = d
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad coefficient {s:?}"))?;
                if d == BigInt::from(0) {
                    return Err(format!("zero denominator in {s:?}"));
                }
                Ok(BigRational::new(n, d))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeckeTerm {
    pub nu: Vector,
    #[serde(default)]
    pub w: Vec<usize>,
    #[serde(default)]
    pub coeff: Coeff,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub nu: Vector,
    #[serde(default)]
    pub coeff: Coeff,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Inspect,
    Endoscopy {
        character: String,
    },
    HeckeMul {
        character: String,
        left: Vec<HeckeTerm>,
        right: Vec<HeckeTerm>,
    },
    CenterTransfer {
        character: String,
        psi: Option<String>,
        terms: Vec<PolyTerm>,
        #[serde(default = "yes")]
        symmetrize: bool,
    },
    ElementaryMatch {
        character: String,
        psi: Option<String>,
    },
    DescentCheck {
        character: String,
        psi: Option<String>,
    },
    LengthAudit {
        character: String,
    },
    Surgery {
        mode: SurgeryMode,
    },
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Inspect => "inspect",
            Task::Endoscopy { .. } => "endoscopy",
            Task::HeckeMul { .. } => "hecke-mul",
            Task::CenterTransfer { .. } => "center-transfer",
            Task::ElementaryMatch { .. } => "elementary-match",
            Task::DescentCheck { .. } => "descent-check",
            Task::LengthAudit { .. } => "length-audit",
            Task::Surgery { .. } => "surgery",
        }
    }

    fn character_names(&self) -> Vec<&str> {
        match self {
            Task::Inspect | Task::Surgery { .. } => vec![],
            Task::Endoscopy { character }
            | Task::HeckeMul { character, .. }
            | Task::LengthAudit { character } => vec![character],
            Task::CenterTransfer { character, psi, .. }
            | Task::ElementaryMatch { character, psi }
            | Task::DescentCheck { character, psi } => {
                let mut v = vec![character.as_str()];
                v.extend(psi.as_deref());
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    pub payload: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub info: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    pub settings: Value,
    pub tasks: Vec<TaskReport>,
    pub summary: Summary,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Problems with the input file itself.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut r = q;
            while r.is_multiple_of(p) {
                r /= p;
            }
            return r == 1;
        }
        p += 1;
    }
    true
}

/// A parsed and checked problem.
pub struct Problem {
    pub datum: RootDatum,
    pub q: u64,
    pub m: u64,
    pub characters: BTreeMap<String, DepthZeroCharacter>,
    pub tasks: Vec<Task>,
}

impl Problem {
    pub fn parse(src: &str) -> std::result::Result<Self, InputError> {
        let file: ProblemFile = serde_json::from_str(src)?;
        if !is_prime_power(file.q) {
            return Err(InputError::Invalid(format!(
                "q = {} is not a prime power >= 2",
                file.q
            )));
        }
        let datum = match file.root_datum {
            DatumInput::Preset(name) => RootDatum::preset(&name),
            DatumInput::Simple {
                rank,
                simple_roots,
                simple_coroots,
            } => RootDatum::from_simple(rank, simple_roots, simple_coroots),
            DatumInput::Explicit {
                rank,
                roots,
                coroots,
                simple,
            } => RootDatum::new(rank, roots, coroots, simple),
        }
        .map_err(|e| InputError::Invalid(format!("root datum: {e}")))?;
        let m = file.q - 1;
        let mut characters = BTreeMap::new();
        for (name, c) in file.characters {
            if c.len() != datum.rank() {
                return Err(InputError::Invalid(format!(
                    "character {name:?} has length {}, expected {}",
                    c.len(),
                    datum.rank()
                )));
            }
            characters.insert(name, DepthZeroCharacter::new(m, &c));
        }
        for (i, t) in file.tasks.iter().enumerate() {
            for name in t.character_names() {
                if !characters.contains_key(name) {
                    return Err(InputError::Invalid(format!(
                        "task {i}: unknown character {name:?}"
                    )));
                }
            }
        }
        Ok(Problem {
            datum,
            q: file.q,
            m,
            characters,
            tasks: file.tasks,
        })
    }
}

fn now_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Parses `src` and runs every task.
pub fn run_source(src: &str, opts: &RunOptions) -> std::result::Result<Report, InputError> {
    let start = Instant::now();
    let problem = Problem::parse(src)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| InputError::Invalid(format!("thread pool: {e}")))?;
    let tasks: Vec<TaskReport> = pool.install(|| {
        problem
            .tasks
            .par_iter()
            .enumerate()
            .map(|(index, task)| {
                let t0 = Instant::now();
                let (status, payload) = match run_task(&problem, task, opts) {
                    Ok(r) => r,
                    Err(e) => (Status::Fail, json!({ "error": e.to_string() })),
                };
                TaskReport {
                    index,
                    task: task.name().to_string(),
                    status,
                    elapsed_ms: opts.timestamp.then(|| now_ms(t0)),
                    payload,
                }
            })
            .collect()
    });
    let count = |s: Status| tasks.iter().filter(|t| t.status == s).count();
    let summary = Summary {
        total: tasks.len(),
        pass: count(Status::Pass),
        fail: count(Status::Fail),
        info: count(Status::Info),
    };
    Ok(Report {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        input_digest: hex::encode(Sha256::digest(src.as_bytes())),
        timestamp: opts.timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
        elapsed_ms: opts.timestamp.then(|| now_ms(start)),
        settings: json!({
            "nu_box": opts.nu_box,
            "normalization": opts.normalization,
        }),
        tasks,
        summary,
    })
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn poly_json(p: &DualTorusPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(nu, c)| json!({ "nu": nu, "coeff": c.to_pairs() }))
            .collect(),
    )
}

fn package_json(pkg: &TransferPackage) -> Value {
    Value::Array(
        pkg.entries
            .iter()
            .map(|(label, poly)| {
                json!({
                    "base": label.base.coords(),
                    "stabilizer_order": label.stabilizer.len(),
                    "poly": poly_json(poly),
                })
            })
            .collect(),
    )
}

fn roots_json(rd: &RootDatum, idx: &[usize]) -> Vec<Vector> {
    idx.iter().map(|&i| rd.root(i).to_vec()).collect()
}

struct Ctx<'a> {
    problem: &'a Problem,
    rd: &'a RootDatum,
}

impl<'a> Ctx<'a> {
    fn chr(&self, name: &str) -> DepthZeroCharacter {
        self.problem.characters[name].clone()
    }

    fn psi(&self, name: &Option<String>) -> DepthZeroCharacter {
        match name {
            Some(n) => self.chr(n),
            None => DepthZeroCharacter::trivial(self.problem.m, self.rd.rank()),
        }
    }

    fn endo(&self, name: &str) -> Result<EndoscopicDatum> {
        endoscopic_datum(self.rd, &self.chr(name))
    }
}

fn run_task(problem: &Problem, task: &Task, opts: &RunOptions) -> Result<(Status, Value)> {
    let rd = &problem.datum;
    let ctx = Ctx { problem, rd };
    match task {
        Task::Inspect => {
            let report = rd.validate();
            let info = rd.center_scheme_info();
            let mut payload = json!({
                "name": rd.name(),
                "rank": rd.rank(),
                "roots": rd.num_roots(),
                "simple_roots": roots_json(rd, rd.simple()),
                "validation": report,
                "center": info,
                "lambda": rd.lambda_group(),
            });
            if report.valid {
                payload["weyl_order"] = json!(rd.weyl_group()?.len());
            }
            Ok((pass_if(report.valid), payload))
        }
        Task::Endoscopy { character } => {
            let e = ctx.endo(character)?;
            let aff = AffineSystem::new(rd, &e.phi_prime);
            let aff_simple: Vec<Value> = aff
                .simple_affine_roots()
                .iter()
                .map(|a| json!({ "root": rd.root(a.root), "offset": a.offset }))
                .collect();
            let factorization = e.w_chi0.iter().all(|x| {
                e.w_prime
                    .iter()
                    .filter(|y| e.c_chi0.contains(&y.inverse().compose(x)))
                    .count()
                    == 1
            });
            Ok((
                pass_if(factorization && e.w_prime.len() * e.c_chi0.len() == e.w_chi0.len()),
                json!({
                    "chi0": e.chi0.coords(),
                    "phi_prime": roots_json(rd, &e.phi_prime),
                    "phi_prime_positive": roots_json(rd, &e.phi_prime_pos),
                    "w_prime_order": e.w_prime.len(),
                    "w_chi0_order": e.w_chi0.len(),
                    "c_chi0_order": e.c_chi0.len(),
                    "unique_factorization": factorization,
                    "s_element": e.s_element,
                    "s_order": e.s_order,
                    "affine_simple_roots": aff_simple,
                    "affine_components": aff.components().len(),
                }),
            ))
        }
        Task::HeckeMul {
            character,
            left,
            right,
        } => {
            let e = ctx.endo(character)?;
            let amb = HeckeAmbient::new(rd, &e, problem.q)?;
            let build = |terms: &[HeckeTerm]| -> Result<HeckeElement> {
                let mut acc = HeckeElement::zero(&amb);
                for t in terms {
                    if t.nu.len() != rd.rank() {
                        return Err(Error::DimensionMismatch {
                            expected: rd.rank(),
                            got: t.nu.len(),
                        });
                    }
                    let w = rd.from_word(&t.w)?;
                    let c = t.coeff.value().map_err(Error::Internal)?;
                    let c = CycloLaurent::from_rational(amb.field(), c);
                    acc = acc.add(&HeckeElement::term(
                        &amb,
                        ExtAffineElement::new(t.nu.clone(), w),
                        c,
                    )?)?;
                }
                Ok(acc)
            };
            let product = build(left)?.multiply(&build(right)?)?;
            let terms: Vec<Value> = product
                .terms()
                .map(|(s, c)| {
                    json!({
                        "nu": s.nu,
                        "w": rd.reduced_word(&s.w),
                        "length": amb.length(s),
                        "coeff": c.to_pairs(),
                    })
                })
                .collect();
            Ok((Status::Info, json!({ "q": problem.q, "product": terms })))
        }
        Task::CenterTransfer {
            character,
            psi,
            terms,
            symmetrize,
        } => {
            let e = ctx.endo(character)?;
            let psi0 = ctx.psi(psi);
            let setup = TransferSetup::new(rd, &e, &psi0);
            let field = CycloField::new(problem.m);
            let mut raw = DualTorusPoly::zero(&field);
            for t in terms {
                if t.nu.len() != rd.rank() {
                    return Err(Error::DimensionMismatch {
                        expected: rd.rank(),
                        got: t.nu.len(),
                    });
                }
                let c = t.coeff.value().map_err(Error::Internal)?;
                raw.add_term(t.nu.clone(), &CycloLaurent::from_rational(&field, c));
            }
            let w = rd.weyl_group()?;
            let theta = setup.theta();
            let stab = stabilizer(&w, &theta);
            if *symmetrize {
                raw = raw.reynolds(&stab);
            }
            let f = setup.g_element(&raw)?;
            let bold = setup.bold_zeta(&f)?;
            let xi = setup.xi_transfer(&f)?;
            let expected = double_coset_count(&e.w_prime, &w, &stab);
            Ok((
                pass_if(bold.block_count() == expected),
                json!({
                    "theta": theta.coords(),
                    "input": poly_json(&raw),
                    "block_count": bold.block_count(),
                    "expected_block_count": expected,
                    "bold_zeta": package_json(&bold),
                    "xi_transfer": package_json(&xi),
                }),
            ))
        }
        Task::ElementaryMatch { character, psi } => {
            let e = ctx.endo(character)?;
            let setup = OrbitalSetup::new(rd, &e, &ctx.psi(psi));
            let boxed = dominant_regular_box(rd, opts.nu_box);
            let reports = boxed
                .par_iter()
                .map(|nu| setup.matching_check(nu, opts.normalization.gprime()))
                .collect::<Result<Vec<_>>>()?;
            let failures: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
            Ok((
                pass_if(failures.is_empty()),
                json!({
                    "normalization": opts.normalization,
                    "checked": reports.len(),
                    "passed": reports.len() - failures.len(),
                    "failures": failures,
                }),
            ))
        }
        Task::DescentCheck { character, psi } => {
            let e = ctx.endo(character)?;
            let psi0 = ctx.psi(psi);
            let setup = TransferSetup::new(rd, &e, &psi0);
            let field = CycloField::new(problem.m);
            let w = rd.weyl_group()?;
            let stab = stabilizer(&w, &setup.theta());
            let samples: Vec<CenterElement> = dominant_regular_box(rd, 1)
                .into_iter()
                .chain(std::iter::once(vec![0; rd.rank()]))
                .map(|nu| setup.g_element(&DualTorusPoly::orbit_sum(&field, &nu, &stab)))
                .collect::<Result<_>>()?;
            let mut ok = true;
            let mut levis = Vec::new();
            for m in rd.all_levis()? {
                let k = rd.kostant_factorization_check(&m)?;
                let fiber = rd.iwasawa_fiber_check(&m.root_indices, &e.phi_prime)?;
                let contains_prime = e.phi_prime.iter().all(|i| m.root_indices.contains(i));
                let stab_inside = stab.iter().all(|x| m.weyl.contains(x));
                let zeta = if contains_prime && stab_inside {
                    let mut all = true;
                    for f in &samples {
                        all &= setup.descent_zeta_check(f, &m.root_indices)?;
                    }
                    Some(all)
                } else {
                    None
                };
                let this = k.unique_factorization
                    && (k.length_additive || !k.standard)
                    && fiber.surjective
                    && fiber.uniform
                    && zeta != Some(false);
                ok &= this;
                levis.push(json!({
                    "roots": roots_json(rd, &m.root_indices),
                    "kostant": k,
                    "fibers": fiber,
                    "zeta_descent": zeta,
                    "pass": this,
                }));
            }
            Ok((pass_if(ok), json!({ "levis": levis })))
        }
        Task::LengthAudit { character } => {
            let e = ctx.endo(character)?;
            let prime = AffineSystem::new(rd, &e.phi_prime);
            let k = opts.nu_box;
            let n = rd.rank();
            let mut checked = 0usize;
            let mut mismatches = Vec::new();
            let mut nu = vec![-k; n];
            'outer: loop {
                for w in &e.w_chi0 {
                    let s = ExtAffineElement::new(nu.clone(), w.clone());
                    let (a, b) = (prime.length(&s)?, prime.length_closed_form(&s)?);
                    checked += 1;
                    if a != b {
                        mismatches.push(json!({ "nu": nu, "w": rd.reduced_word(w), "inversions": a, "closed_form": b }));
                    }
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break 'outer;
                    }
                    if nu[i] < k {
                        nu[i] += 1;
                        break;
                    }
                    nu[i] = -k;
                    i += 1;
                }
            }
            let setup = OrbitalSetup::new(rd, &e, &DepthZeroCharacter::trivial(problem.m, n));
            let reps = setup.dominantized_representatives()?;
            let mut lemma = Vec::new();
            let boxed = dominant_regular_box(rd, k);
            for nu in &boxed {
                for w in &reps {
                    let r = prime.check_translation_length_w_invariance(nu, w);
                    if !r.equal {
                        lemma.push(json!({ "w": rd.reduced_word(w), "report": r }));
                    }
                }
            }
            Ok((
                pass_if(mismatches.is_empty()),
                json!({
                    "checked": checked,
                    "mismatches": mismatches,
                    "translation_checks": boxed.len() * reps.len(),
                    "translation_length_changes": lemma,
                }),
            ))
        }
        Task::Surgery { mode } => {
            let r = rd.datum_surgery(*mode)?;
            let quotient =
                |rows: &[Vector]| crate::lattice::quotient_structure(rows, r.datum.rank());
            let (tors_co, free_co) = quotient(r.datum.coroots());
            let (tors, free) = quotient(r.datum.roots());
            let strs = |v: Vec<BigInt>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            Ok((
                pass_if(r.exact && r.condition_holds),
                json!({
                    "mode": r.mode,
                    "already_satisfied": r.already_satisfied,
                    "rank": r.datum.rank(),
                    "simple_roots": roots_json(&r.datum, r.datum.simple()),
                    "simple_coroots": r.datum.simple().iter().map(|&i| r.datum.coroot(i).to_vec()).collect::<Vec<_>>(),
                    "projection": r.projection,
                    "injection": r.injection,
                    "kernel": r.kernel,
                    "exact": r.exact,
                    "condition_holds": r.condition_holds,
                    "coweight_quotient": { "torsion": strs(tors_co), "free_rank": free_co },
                    "weight_quotient": { "torsion": strs(tors), "free_rank": free },
                }),
            ))
        }
    }
}

/// Preset summary for `workbench presets`.
pub fn presets_json() -> Value {
    Value::Array(
        PRESETS
            .iter()
            .map(|name| {
                let rd = RootDatum::preset(name).expect("preset builds");
                json!({
                    "name": name,
                    "rank": rd.rank(),
                    "roots": rd.num_roots(),
                    "weyl_order": rd.weyl_group().map(|w| w.len()).unwrap_or(0),
                    "lambda": rd.lambda_group(),
                })
            })
            .collect(),
    )
}

fn emit(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

/// Runs the command line; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Presets => {
            emit(&format!("{:#}\n", presets_json()));
            0
        }
        Command::Schema => {
            emit(SCHEMA);
            0
        }
        Command::Run {
            file,
            threads,
            nu_box,
            normalization,
            no_timestamp,
        } => {
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}", InputError::Io(file.display().to_string(), e));
                    return 2;
                }
            };
            let opts = RunOptions {
                threads: threads.unwrap_or_else(|| {
                    std::thread::available_parallelism()
                        .map(|n| n.get())
                        .unwrap_or(1)
                }),
                nu_box,
                normalization,
                timestamp: !no_timestamp,
            };
            match run_source(&src, &opts) {
                Ok(report) => {
                    emit(&report.to_json());
                    i32::from(report.failed())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    }
}
