//! Plain-text `key = value` configuration and grid specifications.
//!
//! A config file holds one assignment per line; `#` starts a comment and blank lines are
//! ignored. Keys match the long flag names with `-` or `_` as separator. Physics keys take
//! grid specs:
//!
//! ```text
//! 0.5            single value
//! 0.5,1,1.5      explicit list
//! 0:10           inclusive range, point count from `points`
//! 0:10:401       inclusive range with its own point count
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const DEFAULT_POINTS: usize = 400;

/// A parsed grid axis. Ranges without a count resolve against `points`.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: Option<usize>,
    },
}

fn grid_error(spec: &str, message: impl Into<String>) -> CliError {
    CliError::Grid {
        spec: spec.to_string(),
        message: message.into(),
    }
}

fn finite(spec: &str, field: &str) -> Result<f64> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| grid_error(spec, format!("`{}` is not a number", field.trim())))?;
    if !x.is_finite() {
        return Err(grid_error(spec, "values must be finite"));
    }
    Ok(x)
}

pub fn parse_grid(spec: &str) -> Result<GridSpec> {
    let s = spec.trim();
    if s.is_empty() {
        return Err(grid_error(spec, "empty"));
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, stop) = match parts.len() {
            2 | 3 => (finite(spec, parts[0])?, finite(spec, parts[1])?),
            _ => return Err(grid_error(spec, "expected start:stop or start:stop:points")),
        };
        let points = match parts.get(2) {
            Some(n) => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| grid_error(spec, "point count must be a positive integer"))?;
                if n == 0 {
                    return Err(grid_error(spec, "point count must be positive"));
                }
                Some(n)
            }
            None => None,
        };
        return Ok(GridSpec::Range {
            start,
            stop,
            points,
        });
    }
    let values = s
        .split(',')
        .map(|v| finite(spec, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridSpec::Values(values))
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        parse_grid(s)
    }
}

impl GridSpec {
    pub fn single(x: f64) -> Self {
        Self::Values(vec![x])
    }

    pub fn range(start: f64, stop: f64) -> Self {
        Self::Range {
            start,
            stop,
            points: None,
        }
    }

    /// Fixes the point count of an open range.
    pub fn resolved(&self, default_points: usize) -> Self {
        match *self {
            Self::Range {
                start,
                stop,
                points: None,
            } => Self::Range {
                start,
                stop,
                points: Some(default_points),
            },
            _ => self.clone(),
        }
    }

    pub fn values(&self, default_points: usize) -> Vec<f64> {
        match *self {
            Self::Values(ref v) => v.clone(),
            Self::Range {
                start,
                stop,
                points,
            } => {
                let n = points.unwrap_or(default_points).max(1);
                if n == 1 {
                    return vec![start];
                }
                let step = (stop - start) / (n - 1) as f64;
                (0..n)
                    .map(|k| {
                        if k + 1 == n {
                            stop
                        } else {
                            start + step * k as f64
                        }
                    })
                    .collect()
            }
        }
    }

    /// The value of a one-point grid.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Self::Values(v) if v.len() == 1 => Some(v[0]),
            Self::Range {
                start,
                points: Some(1),
                ..
            } => Some(*start),
            Self::Range { start, stop, .. } if start == stop => Some(*start),
            _ => None,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Values(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            Self::Range {
                start,
                stop,
                points: Some(n),
            } => write!(f, "{start}:{stop}:{n}"),
            Self::Range {
                start,
                stop,
                points: None,
            } => write!(f, "{start}:{stop}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    E14,
    P14_1,
    P14_2,
    E18,
    P18,
    Tree,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::E14,
        Quantity::P14_1,
        Quantity::P14_2,
        Quantity::E18,
        Quantity::P18,
        Quantity::Tree,
    ];

    /// Whether the quantity depends on the stage-B time and so needs a τ axis.
    pub fn needs_tau(self) -> bool {
        matches!(self, Quantity::E18 | Quantity::P18 | Quantity::Tree)
    }

    /// Whether the quantity is reported per stage-B case.
    pub fn per_case(self) -> bool {
        matches!(self, Quantity::E18 | Quantity::P18)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Quantity::E14 => "E14",
            Quantity::P14_1 => "P14_1",
            Quantity::P14_2 => "P14_2",
            Quantity::E18 => "E18",
            Quantity::P18 => "P18",
            Quantity::Tree => "tree",
        };
        f.write_str(name)
    }
}

impl FromStr for Quantity {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                CliError::usage(format!(
                    "unknown quantity `{s}` (expected E14, P14_1, P14_2, E18, P18 or tree)"
                ))
            })
    }
}

/// Settings gathered from a config file or from flags. Unset fields fall through to the
/// next source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub quantity: Option<Quantity>,
    pub case_id: Option<u8>,
    pub omega_m: Option<GridSpec>,
    pub g: Option<GridSpec>,
    pub lambda1_t: Option<GridSpec>,
    pub lambda1_tau: Option<GridSpec>,
    pub points: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub check: Option<bool>,
}

pub const CONFIG_KEYS: [&str; 10] = [
    "quantity",
    "case",
    "omega_m",
    "g",
    "lambda1_t",
    "lambda1_tau",
    "points",
    "output",
    "threads",
    "check",
];

fn positive(value: &str, what: &str) -> std::result::Result<usize, String> {
    match value.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("{what} must be a positive integer, got `{value}`")),
    }
}

pub fn parse_case(value: &str) -> std::result::Result<u8, String> {
    match value.trim().parse::<u8>() {
        Ok(c @ 1..=4) => Ok(c),
        _ => Err(format!("case must be 1, 2, 3 or 4, got `{value}`")),
    }
}

impl Settings {
    /// Applies one `key = value` assignment.
    fn assign(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let grid = |v: &str| parse_grid(v).map_err(|e| e.to_string());
        match key {
            "quantity" => self.quantity = Some(value.parse().map_err(|e: CliError| e.to_string())?),
            "case" => self.case_id = Some(parse_case(value)?),
            "omega_m" => self.omega_m = Some(grid(value)?),
            "g" => self.g = Some(grid(value)?),
            "lambda1_t" => self.lambda1_t = Some(grid(value)?),
            "lambda1_tau" => self.lambda1_tau = Some(grid(value)?),
            "points" => self.points = Some(positive(value, "points")?),
            "threads" => self.threads = Some(positive(value, "threads")?),
            "output" => self.output = Some(PathBuf::from(value)),
            "check" => {
                self.check = Some(match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(format!("check must be true or false, got `{value}`")),
                })
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// `other` wins wherever it has a value.
    pub fn overridden_by(self, other: Settings) -> Settings {
        Settings {
            quantity: other.quantity.or(self.quantity),
            case_id: other.case_id.or(self.case_id),
            omega_m: other.omega_m.or(self.omega_m),
            g: other.g.or(self.g),
            lambda1_t: other.lambda1_t.or(self.lambda1_t),
            lambda1_tau: other.lambda1_tau.or(self.lambda1_tau),
            points: other.points.or(self.points),
            output: other.output.or(self.output),
            threads: other.threads.or(self.threads),
            check: other.check.or(self.check),
        }
    }

    pub fn points_or_default(&self) -> usize {
        self.points.unwrap_or(DEFAULT_POINTS)
    }
}

pub fn parse_config(text: &str) -> Result<Settings> {
    let mut settings = Settings::default();
    let mut seen: Vec<String> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |message: String| CliError::Config { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got `{content}`")))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        if key.is_empty() {
            return Err(err("missing key".into()));
        }
        if value.is_empty() {
            return Err(err(format!("missing value for `{key}`")));
        }
        if seen.contains(&key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        settings.assign(&key, value).map_err(err)?;
        seen.push(key);
    }
    Ok(settings)
}

pub fn load_config(path: &std::path::Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0.5").unwrap(), GridSpec::Values(vec![0.5]));
        assert_eq!(
            parse_grid(" 0.5, 1,1.5 ").unwrap(),
            GridSpec::Values(vec![0.5, 1.0, 1.5])
        );
        assert_eq!(parse_grid("0:10").unwrap(), GridSpec::range(0.0, 10.0));
        assert_eq!(
            parse_grid("0:10:11").unwrap().values(400),
            (0..=10).map(f64::from).collect::<Vec<_>>()
        );
        assert_eq!(parse_grid("1:3").unwrap().values(3), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("2:7:1").unwrap().values(400), vec![2.0]);
    }

    #[test]
    fn grid_rejects_garbage() {
        for bad in [
            "", " ", "a", "1,,2", "1:2:0", "1:2:x", "1:2:3:4", "nan", "1,inf", ":",
        ] {
            assert!(parse_grid(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn range_ends_exactly_at_stop() {
        let v = parse_grid("0:0.3:4").unwrap().values(400);
        assert_eq!(v.len(), 4);
        assert_eq!(*v.last().unwrap(), 0.3);
    }

    #[test]
    fn scalar_grids() {
        assert_eq!(parse_grid("2").unwrap().scalar(), Some(2.0));
        assert_eq!(parse_grid("2:2").unwrap().scalar(), Some(2.0));
        assert_eq!(parse_grid("1,2").unwrap().scalar(), None);
        assert_eq!(parse_grid("0:1").unwrap().scalar(), None);
    }

    #[test]
    fn config_parses_with_comments_and_separators() {
        let s = parse_config(
            "# sweep\nquantity = P14_2\n\nomega-m = 0.5,1  # two curves\ng=2\nlambda1_t = 0:10\npoints = 50\n",
        )
        .unwrap();
        assert_eq!(s.quantity, Some(Quantity::P14_2));
        assert_eq!(s.omega_m, Some(GridSpec::Values(vec![0.5, 1.0])));
        assert_eq!(s.g, Some(GridSpec::single(2.0)));
        assert_eq!(s.lambda1_t, Some(GridSpec::range(0.0, 10.0)));
        assert_eq!(s.points, Some(50));
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_config(text) {
            Err(CliError::Config { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of("g = 2\nbogus\n"), 2);
        assert_eq!(line_of("g = 2\n\nfoo = 1\n"), 3);
        assert_eq!(line_of("g = 2\ng = 3\n"), 2);
        assert_eq!(line_of("case = 5"), 1);
        assert_eq!(line_of("points = 0"), 1);
        assert_eq!(line_of("\n\nomega_m = 1:x"), 3);
        assert_eq!(line_of("g ="), 1);
        assert_eq!(line_of("= 2"), 1);
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("g = 2\nomega_m = 0.5\npoints = 10").unwrap();
        let flags = Settings {
            g: Some(GridSpec::single(3.0)),
            ..Settings::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.g, Some(GridSpec::single(3.0)));
        assert_eq!(merged.omega_m, Some(GridSpec::single(0.5)));
        assert_eq!(merged.points, Some(10));
    }

    #[test]
    fn quantity_names() {
        for q in Quantity::ALL {
            assert_eq!(q.to_string().parse::<Quantity>().unwrap(), q);
        }
        assert_eq!("p14_1".parse::<Quantity>().unwrap(), Quantity::P14_1);
        assert!("E99".parse::<Quantity>().is_err());
    }
}
