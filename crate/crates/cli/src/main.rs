use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use twistorkit::deformation::{semicontinuity_scan, splitting_stability_scan};
use twistorkit::hypercomplex::{verify_suite, Structure, TwistorData};
use twistorkit::json::{self as tj, JsonScalar};
use twistorkit::quaternionic::{check_quaternionic, QuaternionicData, SectionAB};
use twistorkit::twistor::{default_samples, standard_flat, Chart};
use twistorkit::{rng, Backend, Error, Exact, Float, Matrix, Scalar};

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SCHEMA: u8 = 3;

#[derive(Parser)]
#[command(name = "twistorkit", version, about = "Bundles on CP1, quaternionic structures and flat twistor data")]
struct Cli {
    /// Scalar backend.
    #[arg(long, global = true, env = "TWISTORKIT_BACKEND", default_value = "exact")]
    backend: Backend,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Splitting type of a bundle.
    Split {
        #[arg(long)]
        bundle: PathBuf,
    },
    /// h0, h1, splitting and winding of E(m).
    Cohomology {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i64,
    },
    /// Check A·conj(A) = -I.
    QuatCheck {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Apply the induced real structure to a section.
    RealSection {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        section: PathBuf,
    },
    /// Flat twistor model.
    #[command(subcommand)]
    Twistor(TwistorCmd),
    /// Run the recovery identity battery on twistor data.
    Verify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Metric and Kahler forms on two tangent vectors.
    Metric {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated complex entries, e.g. "1,i".
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Deformation families.
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Build flat data, recover the structure and check everything.
    Roundtrip {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Use this twistor data instead of the built flat data.
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TwistorCmd {
    /// Emit A, Omega_raw, frames and matrices.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant battery with max residuals.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum DeformCmd {
    /// Cohomology of E_t(m) at a special point and at samples.
    Scan(ScanArgs),
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    family: PathBuf,
    /// Parameter values of the special point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    special: String,
    /// Sample values, comma-separated; consecutive groups of `params` form one point.
    #[arg(long, allow_hyphen_values = true)]
    samples: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    twist: i64,
}

enum Failure {
    Usage(String),
    Schema(String),
    Check { msg: String, report: Option<Value> },
}

type CmdResult = Result<(Value, String), Failure>;

fn input_error(e: Error) -> Failure {
    Failure::Schema(e.to_string())
}

fn check_error(e: Error) -> Failure {
    Failure::Check { msg: format!("{e:?}"), report: None }
}

fn read_doc<S: Scalar>(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    tj::parse_document::<S>(&text).map_err(input_error)
}

fn field<'a>(doc: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    doc.get(key).ok_or_else(|| Failure::Schema(format!("missing field {key:?}")))
}

fn parse_list<S: Scalar>(s: &str) -> Result<Vec<S>, Failure> {
    s.split(',')
        .map(|t| tj::parse_scalar_literal::<S>(t).ok_or_else(|| Failure::Usage(format!("bad scalar {t:?}"))))
        .collect()
}

fn cmd_split(path: &Path) -> CmdResult {
    let e = tj::decode_bundle::<Exact>(&read_doc::<Exact>(path)?).map_err(input_error)?;
    let st = e.splitting_type().map_err(check_error)?;
    let summary = format!("splitting {:?}", st.degrees);
    Ok((tj::document(json!({ "splitting": st.degrees, "winding": e.winding() })), summary))
}

fn cmd_cohomology(path: &Path, twist: i64) -> CmdResult {
    let e = tj::decode_bundle::<Exact>(&read_doc::<Exact>(path)?).map_err(input_error)?;
    let c = e.twist(twist).cohomology().map_err(check_error)?;
    let summary = format!("h0 = {}, h1 = {}, splitting {:?}", c.h0, c.h1, c.splitting);
    Ok((
        tj::document(json!({ "h0": c.h0, "h1": c.h1, "splitting": c.splitting, "winding": c.winding, "twist": twist })),
        summary,
    ))
}

fn load_quaternionic<S: JsonScalar>(path: &Path) -> Result<Result<QuaternionicData<S>, Error>, Failure> {
    let doc = read_doc::<S>(path)?;
    let m = tj::decode_matrix::<S>(field(&doc, "matrix")?).map_err(input_error)?;
    Ok(check_quaternionic(m))
}

fn cmd_quat_check<S: JsonScalar>(path: &Path) -> CmdResult {
    match load_quaternionic::<S>(path)? {
        Ok(q) => Ok((
            tj::document(json!({ "quaternionic": true, "n": q.n(), "real_section_dimension": q.real_section_dimension() })),
            format!("quaternionic, n = {}", q.n()),
        )),
        Err(e) => Err(Failure::Check {
            msg: format!("{e:?}"),
            report: Some(tj::document(json!({ "quaternionic": false, "error": format!("{e:?}") }))),
        }),
    }
}

fn cmd_real_section<S: JsonScalar>(matrix: &Path, section: &Path) -> CmdResult {
    let q = load_quaternionic::<S>(matrix)?.map_err(check_error)?;
    let sdoc = read_doc::<S>(section)?;
    let s = tj::decode_section_ab::<S>(field(&sdoc, "section")?).map_err(input_error)?;
    let r = q.induced_r(&s).map_err(check_error)?;
    let real = q.is_real_section(&s).map_err(check_error)?;
    Ok((
        tj::document(json!({ "real": real, "r_of_s": tj::encode_section_ab(&r) })),
        format!("section is {}real", if real { "" } else { "not " }),
    ))
}

fn cmd_twistor_build<S: JsonScalar>(n: usize, out: Option<&Path>) -> CmdResult {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let doc = tj::encode_flat_data::<S>(n).map_err(check_error)?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
        std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok((doc, format!("flat twistor data for n = {n}")))
}

fn tolerance<S: Scalar>() -> f64 {
    match S::BACKEND {
        Backend::Exact => 0.0,
        Backend::Float => 1e-10,
    }
}

fn finish_checks(checks: serde_json::Map<String, Value>, tol: f64, what: &str) -> CmdResult {
    let failures: Vec<String> =
        checks.iter().filter(|(_, v)| v.as_f64().is_none_or(|x| x > tol)).map(|(k, _)| k.clone()).collect();
    let passed = failures.is_empty();
    let report = tj::document(json!({ "checks": checks, "tolerance": tol, "failures": failures, "passed": passed }));
    if passed {
        Ok((report, format!("{what}: all checks within {tol:e}")))
    } else {
        Err(Failure::Check { msg: format!("{what} failed: {}", failures.join(", ")), report: Some(report) })
    }
}

fn cmd_twistor_check<S: JsonScalar>(n: usize, samples: usize, seed: u64) -> CmdResult {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let hk = standard_flat::<S>(n);
    let mut checks = serde_json::Map::new();
    for (name, r) in hk.invariant_residuals() {
        checks.insert(name.into(), json!(r));
    }
    checks.insert("omega_antisymmetric".into(), json!(hk.omega_antisymmetry_residual()));
    let mut g = rng::seeded(seed);
    let mut zetas = default_samples::<S>();
    zetas.extend((0..samples).map(|_| rng::scalar::<S>(&mut g)));
    let (mut inter, mut t20, mut chart, mut sq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let id = Matrix::<S>::identity(hk.dim());
    for z in &zetas {
        inter = inter.max(hk.intertwine_residual(z));
        for c in [Chart::U0, Chart::U1] {
            t20 = t20.max(hk.type20_residual(c, z));
            let s = hk.structure_at(c, z);
            sq = sq.max(s.mul(&s).add(&id).max_abs());
        }
        if !z.is_zero() {
            chart = chart.max(hk.chart_law_defect(z).max_abs());
        }
    }
    checks.insert("I_zeta^2=-1".into(), json!(sq));
    checks.insert("intertwining".into(), json!(inter));
    checks.insert("type_20".into(), json!(t20));
    checks.insert("chart_law".into(), json!(chart));
    let restricted = match hk.restrict_omega() {
        Ok(_) => 0.0,
        Err(Error::NotConstant(v)) => v,
        Err(e) => return Err(check_error(e)),
    };
    checks.insert("omega_restriction_constant".into(), json!(restricted));
    finish_checks(checks, tolerance::<S>(), "twistor check")
}

fn load_twistor_data<S: JsonScalar>(path: &Path) -> Result<TwistorData<S>, Failure> {
    let doc = read_doc::<S>(path)?;
    tj::decode_twistor_data::<S>(&doc).map_err(|e| match e {
        Error::Schema(_) | Error::BackendMismatch(_) | Error::DimensionMismatch { .. } => input_error(e),
        other => check_error(other),
    })
}

fn verify_report<S: JsonScalar>(data: &TwistorData<S>, samples: usize, seed: u64) -> (Value, bool, Vec<String>) {
    let rep = verify_suite(data, samples, seed);
    (serde_json::to_value(&rep).expect("serializable"), rep.passed, rep.failures.clone())
}

fn cmd_verify<S: JsonScalar>(path: &Path, samples: usize, seed: u64) -> CmdResult {
    let data = load_twistor_data::<S>(path)?;
    let (rep, passed, failures) = verify_report(&data, samples, seed);
    let doc = tj::document(json!({ "report": rep }));
    if passed {
        Ok((doc, format!("verify: {samples} samples, all checks passed")))
    } else {
        Err(Failure::Check { msg: format!("verify failed: {}", failures.join(", ")), report: Some(doc) })
    }
}

fn cmd_metric<S: JsonScalar>(path: &Path, a: &str, b: &str) -> CmdResult {
    let data = load_twistor_data::<S>(path)?;
    let (a, b) = (parse_list::<S>(a)?, parse_list::<S>(b)?);
    if a.len() != data.dim() || b.len() != data.dim() {
        return Err(Failure::Usage(format!("vectors need {} entries", data.dim())));
    }
    let g = data.metric(&a, &b).map_err(check_error)?;
    let mut forms = serde_json::Map::new();
    for (name, w) in [("omega_I", Structure::I), ("omega_J", Structure::J), ("omega_K", Structure::K)] {
        forms.insert(name.into(), tj::encode_scalar(&data.kahler(w, &a, &b).map_err(check_error)?));
    }
    let summary = format!("g(a, b) = {g}");
    let mut body = json!({ "g": tj::encode_scalar(&g) });
    body.as_object_mut().expect("object").extend(forms);
    Ok((tj::document(body), summary))
}

fn group<S: Scalar>(vals: Vec<S>, params: usize, what: &str) -> Result<Vec<Vec<S>>, Failure> {
    if params == 0 || !vals.len().is_multiple_of(params) {
        return Err(Failure::Usage(format!("{what}: {} values do not form points of {params} parameters", vals.len())));
    }
    Ok(vals.chunks(params).map(<[S]>::to_vec).collect())
}

fn cmd_deform_scan<S: JsonScalar>(args: &ScanArgs) -> CmdResult {
    let f = tj::decode_family::<S>(&read_doc::<S>(&args.family)?).map_err(input_error)?;
    let special = parse_list::<S>(&args.special)?;
    if special.len() != f.params {
        return Err(Failure::Usage(format!("--special needs {} values", f.params)));
    }
    let samples = group(parse_list::<S>(&args.samples)?, f.params, "--samples")?;
    let rep = semicontinuity_scan(&f, &special, &samples, args.twist).map_err(check_error)?;
    let doc = tj::document(serde_json::to_value(&rep).expect("serializable"));
    if rep.semicontinuous && rep.riemann_roch_constant {
        Ok((doc, format!("special h0 = {}, h1 = {}; semicontinuous", rep.special.h0, rep.special.h1)))
    } else {
        Err(Failure::Check { msg: "semicontinuity or Riemann-Roch check failed".into(), report: Some(doc) })
    }
}

fn cmd_roundtrip<S: JsonScalar>(n: usize, seed: u64, samples: usize, data_path: Option<&Path>) -> CmdResult {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let data = match data_path {
        Some(p) => load_twistor_data::<S>(p)?,
        None => TwistorData::<S>::flat(n).map_err(check_error)?,
    };
    let n = data.n();
    let (verify, mut passed, mut failures) = verify_report(&data, samples, seed);

    // splitting types are computed exactly whatever the backend
    let mut g = rng::seeded(seed);
    let sections: Vec<SectionAB<Exact>> = (0..samples.max(1))
        .map(|_| SectionAB::new(rng::vector(&mut g, 2 * n), rng::vector(&mut g, 2 * n)).expect("even"))
        .collect();
    let stability = splitting_stability_scan(n, &sections).map_err(check_error)?;
    if !(stability.all_ones && stability.correction_zero) {
        passed = false;
        failures.push("normal_bundle_stability".into());
    }

    let (gram, gram_ok) = match data.metric_gram() {
        Ok(m) => {
            let expected = Matrix::<S>::identity(m.rows()).scale(&S::from_i64(2));
            let ok = m.sub(&expected).max_abs() <= tolerance::<S>();
            (Some(m), ok)
        }
        Err(e) => {
            let name = match e {
                Error::NotReal(_) => "NotReal".to_string(),
                other => format!("{other:?}"),
            };
            if !failures.contains(&name) {
                failures.push(name);
            }
            (None, false)
        }
    };
    if !gram_ok {
        passed = false;
        if !failures.iter().any(|f| f == "NotReal") {
            failures.push("metric_gram".into());
        }
    }
    let doc = tj::document(json!({
        "n": n,
        "backend": S::BACKEND.name(),
        "mu": tj::encode_scalar(&data.mu),
        "verify": verify,
        "stability": stability,
        "metric_gram": gram.as_ref().map(tj::encode_matrix),
        "metric_gram_is_2re": gram_ok,
        "failures": failures,
        "passed": passed,
    }));
    if passed {
        Ok((doc, format!("roundtrip n = {n}: all checks passed")))
    } else {
        Err(Failure::Check { msg: format!("roundtrip failed: {}", failures.join(", ")), report: Some(doc) })
    }
}

fn run_generic<S: JsonScalar>(cmd: &Cmd) -> CmdResult {
    match cmd {
        Cmd::Split { .. } | Cmd::Cohomology { .. } => unreachable!("exact-only commands are routed separately"),
        Cmd::QuatCheck { matrix } => cmd_quat_check::<S>(matrix),
        Cmd::RealSection { matrix, section } => cmd_real_section::<S>(matrix, section),
        Cmd::Twistor(TwistorCmd::Build { n, out }) => cmd_twistor_build::<S>(*n, out.as_deref()),
        Cmd::Twistor(TwistorCmd::Check { n, samples, seed }) => cmd_twistor_check::<S>(*n, *samples, *seed),
        Cmd::Verify { data, samples, seed } => cmd_verify::<S>(data, *samples, *seed),
        Cmd::Metric { data, a, b } => cmd_metric::<S>(data, a, b),
        Cmd::Deform(DeformCmd::Scan(args)) => cmd_deform_scan::<S>(args),
        Cmd::Roundtrip { n, seed, samples, data } => cmd_roundtrip::<S>(*n, *seed, *samples, data.as_deref()),
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    match (&cli.cmd, cli.backend) {
        (Cmd::Split { .. } | Cmd::Cohomology { .. }, Backend::Float) => {
            Err(Failure::Usage("split and cohomology need the exact backend".into()))
        }
        (Cmd::Split { bundle }, _) => cmd_split(bundle),
        (Cmd::Cohomology { bundle, twist }, _) => cmd_cohomology(bundle, *twist),
        (cmd, Backend::Exact) => run_generic::<Exact>(cmd),
        (cmd, Backend::Float) => run_generic::<Float>(cmd),
    }
}

fn print_json(v: &Value) {
    // a closed pipe is not an error for a report printer
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok((doc, summary)) => {
            print_json(&doc);
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Schema(msg)) => {
            eprintln!("schema error: {msg}");
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(Failure::Check { msg, report }) => {
            if let Some(r) = report {
                print_json(&r);
            }
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
