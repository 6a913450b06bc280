use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use super::initial::{InitialCondition, InitialKind};
use crate::grid::GridSpec;
use crate::lin_analysis::Coefficients;
use crate::solver::SchemeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    RawF64,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::RawF64 => "raw_f64",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::RawF64 => "bin",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "raw_f64" => Ok(OutputFormat::RawF64),
            _ => Err(format!("unknown value '{s}', expected one of: csv, raw_f64")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub coefficients: Coefficients,
    pub grid: GridSpec,
    pub scheme: SchemeConfig,
    pub initial: InitialCondition,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub output_format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{}", join_lines("parse error", .0))]
    Parse(Vec<ParseIssue>),
    #[error("{}", join_lines("invalid configuration", .0))]
    Validation(Vec<String>),
}

impl ConfigError {
    pub fn messages(&self) -> Vec<String> {
        match self {
            ConfigError::Parse(v) => v.iter().map(ToString::to_string).collect(),
            ConfigError::Validation(v) => v.clone(),
        }
    }
}

fn join_lines<T: fmt::Display>(head: &str, items: &[T]) -> String {
    let mut s = format!("{head}:");
    for i in items {
        let _ = write!(s, "\n  {i}");
    }
    s
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("coefficients", &["c1", "c2", "c3", "c4", "eps_relax", "nu_visc"]),
    ("grid", &["n", "cells", "length", "spacing"]),
    ("scheme", &["scheme", "cfl", "flux", "time_integrator", "t_end", "snapshot_interval"]),
    ("initial", &["kind", "seed"]),
    ("output", &["dir", "format"]),
];

struct Entry {
    line: usize,
    value: String,
}

struct Reader {
    entries: BTreeMap<(&'static str, String), Entry>,
    issues: Vec<ParseIssue>,
    missing: Vec<String>,
}

impl Reader {
    fn take<T: FromStr>(&mut self, section: &'static str, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let e = self.entries.remove(&(section, key.to_string()))?;
        match e.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(err) => {
                self.issues.push(ParseIssue {
                    line: e.line,
                    message: format!("[{section}] {key}: cannot parse '{}': {err}", e.value),
                });
                None
            }
        }
    }

    fn or<T: FromStr>(&mut self, section: &'static str, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        self.take(section, key).unwrap_or(default)
    }

    fn required<T: FromStr>(&mut self, section: &'static str, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        if !self.entries.contains_key(&(section, key.to_string())) {
            self.missing.push(format!("missing required key '{key}' in [{section}]"));
            return None;
        }
        self.take(section, key)
    }

    fn list<T: FromStr>(&mut self, section: &'static str, key: &str) -> Option<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let e = self.entries.remove(&(section, key.to_string()))?;
        let mut out = Vec::new();
        for item in e.value.split(',') {
            match item.trim().parse::<T>() {
                Ok(v) => out.push(v),
                Err(err) => {
                    self.issues.push(ParseIssue {
                        line: e.line,
                        message: format!("[{section}] {key}: cannot parse '{}': {err}", item.trim()),
                    });
                    return None;
                }
            }
        }
        Some(out)
    }

    fn line_of(&self, section: &'static str, key: &str) -> usize {
        self.entries.get(&(section, key.to_string())).map_or(0, |e| e.line)
    }
}

fn lex(text: &str) -> Reader {
    let mut reader = Reader {
        entries: BTreeMap::new(),
        issues: Vec::new(),
        missing: Vec::new(),
    };
    let mut section: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut issue = |message: String| reader.issues.push(ParseIssue { line, message });
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            section = SECTIONS.iter().find(|(s, _)| *s == name).map(|(s, _)| *s);
            if section.is_none() {
                issue(format!("unknown section [{name}]"));
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issue(format!("expected 'key = value', found '{content}'"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            issue(format!("key '{key}' outside a known section"));
            continue;
        };
        if key.is_empty() {
            issue("empty key".into());
            continue;
        }
        let slot = (sec, key.to_string());
        if let Some(prev) = reader.entries.get(&slot) {
            let first = prev.line;
            reader.issues.push(ParseIssue {
                line,
                message: format!("duplicate key '{key}' in [{sec}] (first set on line {first})"),
            });
            continue;
        }
        reader.entries.insert(
            slot,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    // Unknown keys, except generator parameters which depend on `kind`.
    for ((sec, key), e) in &reader.entries {
        let known = SECTIONS.iter().find(|(s, _)| s == sec).map_or(&[][..], |(_, k)| *k);
        if !known.contains(&key.as_str()) && *sec != "initial" {
            reader.issues.push(ParseIssue {
                line: e.line,
                message: format!("unknown key '{key}' in [{sec}]"),
            });
        }
    }
    reader.entries.retain(|(sec, key), _| {
        *sec == "initial" || SECTIONS.iter().any(|(s, k)| s == sec && k.contains(&key.as_str()))
    });
    reader
}

/// Parses a sectioned `key = value` document. Every problem found is
/// reported: all parse issues if there are any, otherwise every violated
/// invariant.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut r = lex(text);
    let d = SchemeConfig::default();

    let c1 = r.required::<f64>("coefficients", "c1");
    let c3 = r.required::<f64>("coefficients", "c3");
    let mut coefficients = Coefficients::new(c1.unwrap_or(f64::NAN), r.or("coefficients", "c2", 1.0), c3.unwrap_or(f64::NAN), r.or("coefficients", "c4", 0.0));
    coefficients.eps_relax = r.or("coefficients", "eps_relax", coefficients.eps_relax);
    coefficients.nu_visc = r.or("coefficients", "nu_visc", coefficients.nu_visc);

    let n = r.required::<usize>("grid", "n");
    let cells = if r.entries.contains_key(&("grid", "cells".into())) {
        r.list::<usize>("grid", "cells")
    } else {
        r.missing.push("missing required key 'cells' in [grid]".into());
        None
    };
    let both = r.entries.contains_key(&("grid", "length".into())) && r.entries.contains_key(&("grid", "spacing".into()));
    if both {
        let line = r.line_of("grid", "spacing");
        r.issues.push(ParseIssue {
            line,
            message: "[grid] give either length or spacing, not both".into(),
        });
    }
    let length = r.list::<f64>("grid", "length");
    let spacing = r.list::<f64>("grid", "spacing");

    let scheme = SchemeConfig {
        scheme: r.or("scheme", "scheme", d.scheme),
        cfl: r.or("scheme", "cfl", d.cfl),
        flux: r.or("scheme", "flux", d.flux),
        time_integrator: r.or("scheme", "time_integrator", d.time_integrator),
        t_end: r.or("scheme", "t_end", d.t_end),
        snapshot_interval: r.or("scheme", "snapshot_interval", d.snapshot_interval),
    };

    let kind = r.or("initial", "kind", InitialKind::Uniform);
    let seed = r.or("initial", "seed", 0u64);
    let mut initial = InitialCondition::new(kind);
    let params: Vec<(String, usize, String)> = r
        .entries
        .iter()
        .filter(|((sec, _), _)| *sec == "initial")
        .map(|((_, k), e)| (k.clone(), e.line, e.value.clone()))
        .collect();
    for (key, line, value) in params {
        r.entries.remove(&("initial", key.clone()));
        if !kind.params().iter().any(|(k, _)| *k == key) {
            let names: Vec<_> = kind.params().iter().map(|(k, _)| *k).collect();
            r.issues.push(ParseIssue {
                line,
                message: format!("unknown key '{key}' in [initial] (kind {kind} takes: kind, seed, {})", names.join(", ")),
            });
            continue;
        }
        match value.parse::<f64>() {
            Ok(v) => initial.set(&key, v).expect("declared parameter"),
            Err(e) => r.issues.push(ParseIssue {
                line,
                message: format!("[initial] {key}: cannot parse '{value}': {e}"),
            }),
        }
    }

    let output_dir: PathBuf = r.or("output", "dir", PathBuf::from("out"));
    let output_format = r.or("output", "format", OutputFormat::Csv);

    if !r.issues.is_empty() {
        r.issues.sort_by_key(|i| i.line);
        return Err(ConfigError::Parse(r.issues));
    }

    let mut v = r.missing;
    if c1.is_some() && c3.is_some() {
        v.extend(coefficients.violations());
    }
    v.extend(scheme.violations());
    let grid = match (n, cells) {
        (Some(n), Some(cells)) => build_grid(n, &cells, length, spacing, &mut v),
        _ => None,
    };
    if let Some(g) = &grid {
        v.extend(initial.violations(g));
    }
    match grid {
        Some(grid) if v.is_empty() => Ok(RunConfig {
            coefficients,
            grid,
            scheme,
            initial,
            seed,
            output_dir,
            output_format,
        }),
        _ => Err(ConfigError::Validation(v)),
    }
}

fn broadcast<T: Copy>(name: &str, values: &[T], n: usize, v: &mut Vec<String>) -> Option<Vec<T>> {
    match values.len() {
        1 => Some(vec![values[0]; n]),
        len if len == n => Some(values.to_vec()),
        len => {
            v.push(format!("[grid] {name} has {len} entries, expected 1 or n = {n}"));
            None
        }
    }
}

fn build_grid(n: usize, cells: &[usize], length: Option<Vec<f64>>, spacing: Option<Vec<f64>>, v: &mut Vec<String>) -> Option<GridSpec> {
    if n < 2 {
        v.push(format!("n >= 2 required (n = {n})"));
        return None;
    }
    let cells = broadcast("cells", cells, n, v)?;
    let spacing = match (length, spacing) {
        (_, Some(h)) => broadcast("spacing", &h, n, v)?,
        (Some(l), None) => broadcast("length", &l, n, v)?
            .iter()
            .zip(&cells)
            .map(|(l, c)| l / *c as f64)
            .collect(),
        (None, None) => cells.iter().map(|c| 1.0 / *c as f64).collect(),
    };
    match GridSpec::new(&cells, &spacing) {
        Ok(g) => Some(g),
        Err(e) => {
            v.push(e.to_string());
            None
        }
    }
}

fn list<T: fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Writes every field explicitly; [`parse_config`] reads it back unchanged.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let c = &cfg.coefficients;
    let s = &cfg.scheme;
    let mut out = String::new();
    let _ = writeln!(out, "[coefficients]");
    for (k, x) in [("c1", c.c1), ("c2", c.c2), ("c3", c.c3), ("c4", c.c4), ("eps_relax", c.eps_relax), ("nu_visc", c.nu_visc)] {
        let _ = writeln!(out, "{k} = {x:?}");
    }
    let _ = writeln!(out, "\n[grid]\nn = {}", cfg.grid.dim());
    let _ = writeln!(out, "cells = {}", list(cfg.grid.cells()));
    let _ = writeln!(out, "spacing = {}", list(cfg.grid.spacing()));
    let _ = writeln!(out, "\n[scheme]\nscheme = {}\ncfl = {:?}\nflux = {}", s.scheme, s.cfl, s.flux);
    let _ = writeln!(out, "time_integrator = {}\nt_end = {:?}", s.time_integrator, s.t_end);
    let _ = writeln!(out, "snapshot_interval = {:?}", s.snapshot_interval);
    let _ = writeln!(out, "\n[initial]\nkind = {}\nseed = {}", cfg.initial.kind, cfg.seed);
    for (k, x) in cfg.initial.params() {
        let _ = writeln!(out, "{k} = {x:?}");
    }
    let _ = writeln!(out, "\n[output]\ndir = {}\nformat = {}", cfg.output_dir.display(), cfg.output_format);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Scheme;
    use proptest::prelude::*;

    const MINIMAL: &str = "[coefficients]\nc1 = 1\nc3 = 1\n[grid]\nn = 2\ncells = 16\n";

    #[test]
    fn minimal_uses_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.coefficients.c2, 1.0);
        assert_eq!(cfg.coefficients.c4, 0.0);
        assert_eq!(cfg.scheme, SchemeConfig::default());
        assert_eq!(cfg.scheme.scheme, Scheme::SplittingRelaxation);
        assert_eq!(cfg.scheme.cfl, 0.5);
        assert_eq!(cfg.grid.cells(), &[16, 16]);
        assert_eq!(cfg.initial.kind, InitialKind::Uniform);
        assert_eq!(cfg.output_format, OutputFormat::Csv);
    }

    #[test]
    fn comments_lists_and_lengths() {
        let text = "# run\n[coefficients]\nc1 = 1.5 # speed\nc3 = 2\nc4 = 0.25\n\n[grid]\nn = 3\ncells = 8, 8, 4\nlength = 2\n[output]\nformat = raw_f64\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.coefficients.c1, 1.5);
        assert_eq!(cfg.grid.cells(), &[8, 8, 4]);
        assert_eq!(cfg.grid.spacing()[2], 0.5);
        assert_eq!(cfg.output_format, OutputFormat::RawF64);
    }

    #[test]
    fn validation_lists_every_violation() {
        let text = "[coefficients]\nc1 = 0\nc3 = -1\n[grid]\nn = 2\ncells = 16\n[scheme]\ncfl = 2\n";
        let ConfigError::Validation(v) = parse_config(text).unwrap_err() else {
            panic!("expected validation error");
        };
        assert!(v.iter().any(|m| m.contains("c1 > 0")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("c3 > 0")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("cfl")), "{v:?}");
    }

    #[test]
    fn unknown_keys_name_key_and_section() {
        let text = "[coefficients]\nc1 = 1\nc3 = 1\nc5 = 2\n[grid]\nn = 2\ncells = 16\n[initial]\nkind = angle_wave\nwidth = 0.1\n";
        let ConfigError::Parse(v) = parse_config(text).unwrap_err() else {
            panic!("expected parse error");
        };
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].line, 4);
        assert!(v[0].message.contains("'c5'") && v[0].message.contains("[coefficients]"));
        assert_eq!(v[1].line, 10);
        assert!(v[1].message.contains("'width'") && v[1].message.contains("[initial]"));
    }

    #[test]
    fn parse_issues_collected() {
        let text = "c1 = 1\n[coefficients]\nc1 = x\nc3 = 1\nc3 = 2\n[physics]\nfoo\n[grid]\nn = 2\ncells = 16\n[scheme]\nscheme = rk4\n";
        let ConfigError::Parse(v) = parse_config(text).unwrap_err() else {
            panic!("expected parse error");
        };
        let lines: Vec<usize> = v.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![1, 3, 5, 6, 7, 12], "{v:?}");
    }

    #[test]
    fn missing_required_keys() {
        let ConfigError::Validation(v) = parse_config("[grid]\nn = 2\n").unwrap_err() else {
            panic!();
        };
        assert_eq!(v.len(), 3, "{v:?}");
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (0.1f64..5.0, -5.0f64..5.0, 0.1f64..5.0, -5.0f64..5.0, 0.0f64..1.0),
            (2usize..4, 4usize..40, 0.01f64..1.0),
            (0usize..3, 0.01f64..1.0, 0.01f64..3.0, any::<bool>()),
            (0usize..4, any::<u64>(), 0.0f64..0.9),
        )
            .prop_map(|(co, gr, sc, ic)| {
                let mut coefficients = Coefficients::new(co.0, co.1, co.2, co.3);
                coefficients.nu_visc = co.4;
                let grid = GridSpec::new(&vec![gr.1; gr.0], &vec![gr.2; gr.0]).unwrap();
                let scheme = SchemeConfig {
                    scheme: Scheme::ALL[sc.0],
                    cfl: sc.1,
                    t_end: sc.2,
                    time_integrator: if sc.3 { crate::solver::TimeIntegrator::SspRk2 } else { crate::solver::TimeIntegrator::ForwardEuler },
                    ..SchemeConfig::default()
                };
                let mut initial = InitialCondition::new(InitialKind::ALL[ic.0]);
                initial.set("rho0", 1.0 + ic.2).unwrap();
                RunConfig {
                    coefficients,
                    grid,
                    scheme,
                    initial,
                    seed: ic.1,
                    output_dir: PathBuf::from("runs/a"),
                    output_format: if ic.1 % 2 == 0 { OutputFormat::Csv } else { OutputFormat::RawF64 },
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip(cfg in arb_config()) {
            let text = serialize_config(&cfg);
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}
