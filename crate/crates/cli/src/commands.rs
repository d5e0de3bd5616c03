//! Subcommand bodies. Each returns whether the run succeeded; errors map to exit code 3.

use std::path::Path;

use surflab::classify::classify_family;
use surflab::families::{build_family, catalog_schemas, FamilyConfig};
use surflab::verify::{load_fixtures, run_suite, Suite};

use crate::mesh::mesh_csv;
use crate::CliError;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to stdout; a closed pipe (`surflab families | head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(config: &Path) -> Result<surflab::families::Family, CliError> {
    let cfg = FamilyConfig::from_path(config).map_err(|e| match e {
        surflab::Error::Config { path, message } => surflab::Error::Config {
            path: format!("{}:{path}", config.display()),
            message,
        },
        e => e,
    })?;
    let family = build_family(&cfg)?;
    for w in &family.warnings {
        eprintln!("warning: {w}");
    }
    Ok(family)
}

pub fn families(json: bool) -> Result<(), CliError> {
    let schemas = catalog_schemas();
    if json {
        return emit(&to_json(&schemas));
    }
    let mut text = String::new();
    for s in schemas {
        let cs: Vec<String> = s.c.iter().map(|c| c.to_string()).collect();
        text += &format!("{:<28} c ∈ {{{}}}  {}\n", s.id, cs.join(","), s.description);
        if !s.params.is_empty() {
            let ps: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            text += &format!("{:<28} params: {}\n", "", ps.join(" "));
        }
        if !s.profiles.is_empty() {
            let ps: Vec<String> = s
                .profiles
                .iter()
                .map(|(k, v)| format!("{k}=\"{v}\""))
                .collect();
            text += &format!("{:<28} profiles: {}\n", "", ps.join(" "));
        }
    }
    emit(&text)
}

pub fn construct(config: &Path, out: &Path) -> Result<(), CliError> {
    let family = load(config)?;
    write(out, &mesh_csv(&family)?)
}

pub fn analyze(config: &Path, report: &Path) -> Result<(), CliError> {
    let family = load(config)?;
    write(report, &to_json(&classify_family(&family)?))
}

/// Runs the suite and reports failing entries on stderr; `Ok(false)` when any entry fails.
pub fn verify(
    suite: Suite,
    config_dir: Option<&Path>,
    report: Option<&Path>,
) -> Result<bool, CliError> {
    let fixtures = match config_dir {
        Some(dir) => load_fixtures(dir)?,
        None => Vec::new(),
    };
    let result = run_suite(suite, &fixtures);
    let json = result.to_json();
    match report {
        Some(path) => write(path, &json)?,
        None => emit(&json)?,
    }
    for e in result.failures() {
        eprintln!(
            "FAIL {} {} {}: residual {:e} (tolerance {:e}){}",
            e.suite,
            e.case,
            e.quantity,
            e.residual,
            e.tolerance,
            e.detail
                .as_ref()
                .map(|d| format!(" [{d}]"))
                .unwrap_or_default()
        );
    }
    let s = &result.summary;
    eprintln!(
        "{}: {} pass, {} fail, {} indeterminate, {} informative",
        suite.as_str(),
        s.pass,
        s.fail,
        s.indeterminate,
        s.informative
    );
    Ok(result.passed())
}
