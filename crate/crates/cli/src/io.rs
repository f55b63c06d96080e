use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use renege_talk::format::round_sig;
use renege_talk::{Error, Exec, FiniteCheapTalkGame};
use serde_json::Value;

/// Anything that stops a command, tagged with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io { path: PathBuf, message: String },
    /// The command ran but its answer is negative (refused certificate,
    /// failed verification).
    Negative,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Lib(e) if e.is_validation() => ExitCode::from(2),
            Failure::Lib(e) if e.is_capability() => ExitCode::from(3),
            _ => ExitCode::from(1),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io { path, message } => write!(f, "{}: {message}", path.display()),
            Failure::Negative => f.write_str("negative result"),
        }
    }
}

pub type CliResult<T = ()> = std::result::Result<T, Failure>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io { path: path.to_path_buf(), message: e.to_string() })
}

pub fn read_game(path: &Path) -> CliResult<FiniteCheapTalkGame> {
    let text = read_text(path)?;
    FiniteCheapTalkGame::from_json(&text).map_err(|e| Failure::Lib(with_file(e, path)))
}

/// Parses JSON into `T`, reporting malformed input as a validation error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        Failure::Lib(Error::Invalid {
            invariant: format!("malformed JSON: {e}"),
            location: Some(format!("{} line {}", path.display(), e.line())),
        })
    })
}

pub fn with_file(e: Error, path: &Path) -> Error {
    match e {
        Error::Invalid { invariant, location } => Error::Invalid {
            invariant,
            location: Some(match location {
                Some(l) => format!("{}: {l}", path.display()),
                None => path.display().to_string(),
            }),
        },
        other => other,
    }
}

/// Rounds every float to 12 significant digits so repeated runs give
/// byte-identical files.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn json_text<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable output");
    let mut s = serde_json::to_string_pretty(&round_floats(v)).expect("json text");
    s.push('\n');
    s
}

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io { path: path.to_path_buf(), message: e.to_string() }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io { path: PathBuf::from("<stdout>"), message: e.to_string() })
        }
    }
}

/// Reads `RENEGE_TALK_THREADS`: unset uses the default pool, `0` forces
/// sequential evaluation, `n` caps the rayon pool at `n` threads.
pub fn exec_from_env() -> CliResult<Exec> {
    let Ok(raw) = std::env::var("RENEGE_TALK_THREADS") else {
        return Ok(Exec::default());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Lib(Error::Invalid {
            invariant: format!("thread count must be a non-negative integer, got {raw:?}"),
            location: Some("RENEGE_TALK_THREADS".into()),
        })
    })?;
    if n == 0 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        Ok(Exec::Parallel)
    }
    #[cfg(not(feature = "parallel"))]
    Ok(Exec::Sequential)
}
