//! SPICE-subset netlist parser and emitter.
//!
//! Only four element letters are interpreted: `R`, `C`, `V`, and `M`.
//! Everything else (subcircuit bodies, `.model` cards, `.control` blocks,
//! comments, analysis directives) is carried through verbatim so that an
//! untouched netlist re-emits byte for byte.
//!
//! # Recognized syntax
//!
//! ```text
//! <title line>
//! * comment
//! Rname n1 n2 value            resistor (ohms)
//! Cname n1 n2 value            capacitor (farads)
//! Vname n+ n- SIN(...)         voltage source (SIN/PULSE/EXP/DC)
//! Mname d g s b model ...      MOSFET, nodes recorded, otherwise opaque
//! .tran / .end / wrdata ...    directives, preserved verbatim
//! + <continuation>             merged into the previous logical line
//! ```
//!
//! Values accept the SPICE magnitude suffixes `f p n u m k MEG G`
//! (case-insensitive); trailing unit letters after a suffix are ignored,
//! so `1ps` reads as 1e-12.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Ground node name.
pub const GROUND: &str = "0";

/// Element classification by leading letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Resistor,
    Capacitor,
    VoltageSource,
    Mosfet,
    /// Unrecognized element letter; kept verbatim, never interpreted.
    Other,
}

/// Voltage-source waveform descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveformSpec {
    /// `SIN(vo va freq td theta phase)` — phase in degrees.
    Sin {
        vo: f64,
        va: f64,
        freq: f64,
        td: f64,
        theta: f64,
        phase: f64,
    },
    /// `PULSE(v1 v2 td tr tf pw per)`.
    Pulse {
        v1: f64,
        v2: f64,
        td: f64,
        tr: f64,
        tf: f64,
        pw: f64,
        per: f64,
    },
    /// `EXP(v1 v2 td1 tau1 td2 tau2)`.
    Exp {
        v1: f64,
        v2: f64,
        td1: f64,
        tau1: f64,
        td2: f64,
        tau2: f64,
    },
    /// Constant level.
    Dc { level: f64 },
}

impl WaveformSpec {
    fn validate(&self) -> std::result::Result<(), String> {
        let nonneg = |v: f64, what: &str| {
            if v < 0.0 {
                Err(format!("{what} must be >= 0, got {v}"))
            } else {
                Ok(())
            }
        };
        match self {
            WaveformSpec::Sin { freq, td, .. } => {
                if *freq <= 0.0 {
                    return Err(format!("SIN freq must be > 0, got {freq}"));
                }
                nonneg(*td, "SIN td")
            }
            WaveformSpec::Pulse {
                td, tr, tf, pw, per, ..
            } => {
                nonneg(*td, "PULSE td")?;
                nonneg(*tr, "PULSE tr")?;
                nonneg(*tf, "PULSE tf")?;
                nonneg(*pw, "PULSE pw")?;
                nonneg(*per, "PULSE per")
            }
            WaveformSpec::Exp {
                td1, tau1, td2, tau2, ..
            } => {
                nonneg(*td1, "EXP td1")?;
                nonneg(*td2, "EXP td2")?;
                if *tau1 <= 0.0 || *tau2 <= 0.0 {
                    return Err(format!("EXP tau1/tau2 must be > 0, got {tau1}/{tau2}"));
                }
                Ok(())
            }
            WaveformSpec::Dc { .. } => Ok(()),
        }
    }
}

impl fmt::Display for WaveformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveformSpec::Sin {
                vo,
                va,
                freq,
                td,
                theta,
                phase,
            } => write!(f, "SIN({vo} {va} {freq} {td} {theta} {phase})"),
            WaveformSpec::Pulse {
                v1,
                v2,
                td,
                tr,
                tf,
                pw,
                per,
            } => write!(f, "PULSE({v1} {v2} {td} {tr} {tf} {pw} {per})"),
            WaveformSpec::Exp {
                v1,
                v2,
                td1,
                tau1,
                td2,
                tau2,
            } => write!(f, "EXP({v1} {v2} {td1} {tau1} {td2} {tau2})"),
            WaveformSpec::Dc { level } => write!(f, "DC {level}"),
        }
    }
}

/// One parsed element line.
#[derive(Debug, Clone)]
pub struct Element {
    pub kind: ElementKind,
    pub name: String,
    /// Node names in source order. Two for R/C/V, up to four for M.
    pub nodes: Vec<String>,
    /// Ohms for R, farads for C; absent for V/M/Other.
    pub value: Option<f64>,
    /// Waveform for voltage sources.
    pub source_spec: Option<WaveformSpec>,
    /// Original source text (possibly multiple physical lines). `None`
    /// marks an element synthesized or modified by a rewrite, which is
    /// emitted in canonical form instead.
    raw: Option<String>,
}

impl Element {
    /// Build a synthesized two-terminal element, emitted canonically.
    pub fn synthesized(kind: ElementKind, name: &str, a: &str, b: &str, value: f64) -> Self {
        Element {
            kind,
            name: name.to_string(),
            nodes: vec![a.to_string(), b.to_string()],
            value: Some(value),
            source_spec: None,
            raw: None,
        }
    }

    /// True when the element still carries its original source text.
    pub fn is_verbatim(&self) -> bool {
        self.raw.is_some()
    }

    /// Drop the raw text so the element re-emits canonically (used after a
    /// rewrite changes its value).
    pub fn mark_modified(&mut self) {
        self.raw = None;
    }

    fn emit_line(&self) -> String {
        match &self.raw {
            Some(raw) => raw.clone(),
            None => {
                let nodes = self.nodes.join(" ");
                match (self.value, &self.source_spec) {
                    (Some(v), _) => format!("{} {} {}", self.name, nodes, format_value(v)),
                    (None, Some(spec)) => format!("{} {} {}", self.name, nodes, spec),
                    (None, None) => format!("{} {}", self.name, nodes),
                }
            }
        }
    }
}

/// Print a value at 17 significant digits, enough to round-trip any f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub(crate) enum Item {
    Element(Element),
    Directive(String),
}

/// A parsed netlist: title line plus an ordered mix of elements and
/// verbatim directive lines.
#[derive(Debug, Clone)]
pub struct Netlist {
    pub title: String,
    pub(crate) items: Vec<Item>,
    trailing_newline: bool,
}

impl Netlist {
    /// Parse netlist text. The first line is always the title.
    pub fn parse(text: &str) -> Result<Netlist> {
        let trailing_newline = text.ends_with('\n');
        let mut lines = text.lines();
        let title = lines.next().unwrap_or("").to_string();

        // Merge continuation lines ("+" in the first non-blank column) into
        // logical lines, remembering the raw text and starting line number.
        struct Logical {
            raw: String,
            merged: String,
            line_no: usize,
        }
        let mut logicals: Vec<Logical> = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2; // 1-based, after the title
            let trimmed = line.trim_start();
            if trimmed.starts_with('+') {
                if let Some(prev) = logicals.last_mut() {
                    prev.raw.push('\n');
                    prev.raw.push_str(line);
                    prev.merged.push(' ');
                    prev.merged.push_str(trimmed.trim_start_matches('+'));
                    continue;
                }
            }
            logicals.push(Logical {
                raw: line.to_string(),
                merged: line.to_string(),
                line_no,
            });
        }

        let mut items = Vec::new();
        let mut seen_names: BTreeSet<String> = BTreeSet::new();
        // Depth counters for opaque blocks.
        let mut control_depth = 0usize;
        let mut subckt_depth = 0usize;

        for logical in &logicals {
            let merged = logical.merged.trim();
            let lower = merged.to_ascii_lowercase();

            if control_depth > 0 || subckt_depth > 0 {
                if lower.starts_with(".endc") {
                    control_depth = control_depth.saturating_sub(1);
                } else if lower.starts_with(".ends") {
                    subckt_depth = subckt_depth.saturating_sub(1);
                } else if lower.starts_with(".control") {
                    control_depth += 1;
                } else if lower.starts_with(".subckt") {
                    subckt_depth += 1;
                }
                items.push(Item::Directive(logical.raw.clone()));
                continue;
            }

            if lower.starts_with(".control") {
                control_depth += 1;
                items.push(Item::Directive(logical.raw.clone()));
                continue;
            }
            if lower.starts_with(".subckt") {
                subckt_depth += 1;
                items.push(Item::Directive(logical.raw.clone()));
                continue;
            }

            let first = merged.chars().next();
            match first {
                None | Some('*') | Some('.') => {
                    items.push(Item::Directive(logical.raw.clone()));
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let elem = parse_element(merged, logical.line_no, &logical.raw)?;
                    let upper = elem.name.to_ascii_uppercase();
                    if !seen_names.insert(upper) {
                        return Err(Error::DuplicateElement {
                            name: elem.name.clone(),
                            line: logical.line_no,
                        });
                    }
                    items.push(Item::Element(elem));
                }
                _ => {
                    // Numeric or punctuation-led lines are not elements.
                    items.push(Item::Directive(logical.raw.clone()));
                }
            }
        }

        Ok(Netlist {
            title,
            items,
            trailing_newline,
        })
    }

    /// Re-emit the netlist. Untouched lines come back verbatim.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.title);
        for item in &self.items {
            out.push('\n');
            match item {
                Item::Element(e) => out.push_str(&e.emit_line()),
                Item::Directive(d) => out.push_str(d),
            }
        }
        if self.trailing_newline {
            out.push('\n');
        }
        out
    }

    /// Elements in source order.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.items.iter().filter_map(|it| match it {
            Item::Element(e) => Some(e),
            Item::Directive(_) => None,
        })
    }

    pub(crate) fn elements_mut(&mut self) -> impl Iterator<Item = &mut Element> {
        self.items.iter_mut().filter_map(|it| match it {
            Item::Element(e) => Some(e),
            Item::Directive(_) => None,
        })
    }

    /// Directive lines (comments, dot cards, control-block bodies) in
    /// source order.
    pub fn directives(&self) -> impl Iterator<Item = &str> {
        self.items.iter().filter_map(|it| match it {
            Item::Directive(d) => Some(d.as_str()),
            Item::Element(_) => None,
        })
    }

    /// Distinct non-ground node names declared by element terminals.
    pub fn node_names(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        for e in self.elements() {
            for n in &e.nodes {
                if n != GROUND {
                    set.insert(n.clone());
                }
            }
        }
        set
    }

    /// Rewrite output directives (`wrdata`, `print`, `plot`, `save`,
    /// `write`) so that `v(<deleted>)` references point at the mapped
    /// survivor node.
    ///
    /// An empty mapping is the identity. With a non-empty mapping, a
    /// referenced node that neither survives in the element list nor has a
    /// mapping entry is an error.
    pub fn remap_output_nodes(&self, mapping: &BTreeMap<String, String>) -> Result<Netlist> {
        if mapping.is_empty() {
            return Ok(self.clone());
        }
        let live = self.node_names();
        let mut out = self.clone();
        for item in &mut out.items {
            if let Item::Directive(text) = item {
                if is_output_directive(text) {
                    *text = remap_voltage_refs(text, mapping, &live)?;
                }
            }
        }
        Ok(out)
    }
}

fn is_output_directive(line: &str) -> bool {
    let first = line
        .trim_start()
        .split_whitespace()
        .next()
        .unwrap_or("")
        .to_ascii_lowercase();
    matches!(
        first.trim_start_matches('.'),
        "wrdata" | "print" | "plot" | "save" | "write"
    )
}

/// Replace node arguments inside `v(...)` expressions. Handles the
/// differential form `v(a,b)` by mapping each argument independently.
fn remap_voltage_refs(
    line: &str,
    mapping: &BTreeMap<String, String>,
    live: &BTreeSet<String>,
) -> Result<String> {
    let bytes = line.as_bytes();
    let mut out = String::with_capacity(line.len());
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let prev_ok = i == 0 || {
            let p = bytes[i - 1] as char;
            !(p.is_ascii_alphanumeric() || p == '_')
        };
        if (c == 'v' || c == 'V') && prev_ok && i + 1 < bytes.len() && bytes[i + 1] == b'(' {
            if let Some(close) = line[i + 2..].find(')') {
                let inner = &line[i + 2..i + 2 + close];
                let mut mapped_parts = Vec::new();
                for part in inner.split(',') {
                    let node = part.trim();
                    if node.is_empty() {
                        mapped_parts.push(part.to_string());
                        continue;
                    }
                    if let Some(target) = mapping.get(node) {
                        mapped_parts.push(target.clone());
                    } else if node == GROUND || live.contains(node) {
                        mapped_parts.push(node.to_string());
                    } else {
                        return Err(Error::MissingRemap {
                            node: node.to_string(),
                        });
                    }
                }
                out.push(c);
                out.push('(');
                out.push_str(&mapped_parts.join(","));
                out.push(')');
                i += 2 + close + 1;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    Ok(out)
}

/// Decode a SPICE value token: plain float, or float plus magnitude suffix
/// (`f p n u m k MEG G`, case-insensitive). Trailing unit letters after the
/// suffix are ignored, matching common SPICE practice (`1pF`, `1kohm`).
pub fn parse_spice_value(token: &str) -> Option<f64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = t.to_ascii_lowercase();
    // Longest prefix that parses as a float.
    let mut split = 0;
    for i in (1..=lower.len()).rev() {
        if !lower.is_char_boundary(i) {
            continue;
        }
        if let Ok(v) = lower[..i].parse::<f64>() {
            if v.is_finite() {
                split = i;
                break;
            }
        }
    }
    if split == 0 {
        return None;
    }
    let mantissa: f64 = lower[..split].parse().ok()?;
    let rest = &lower[split..];
    let (mult, consumed) = if rest.starts_with("meg") {
        (1e6, 3)
    } else {
        match rest.chars().next() {
            Some('f') => (1e-15, 1),
            Some('p') => (1e-12, 1),
            Some('n') => (1e-9, 1),
            Some('u') => (1e-6, 1),
            Some('m') => (1e-3, 1),
            Some('k') => (1e3, 1),
            Some('g') => (1e9, 1),
            Some(c) if c.is_ascii_alphabetic() => (1.0, 0),
            _ => return None,
        }
    };
    // Anything after the suffix must be unit junk (letters only).
    if !rest[consumed..].chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    Some(mantissa * mult)
}

fn parse_element(merged: &str, line_no: usize, raw: &str) -> Result<Element> {
    let tokens: Vec<&str> = merged.split_whitespace().collect();
    let name = tokens[0].to_string();
    let letter = name.chars().next().unwrap().to_ascii_uppercase();
    let err = |msg: String| Error::Parse { line: line_no, msg };

    let elem = match letter {
        'R' | 'C' => {
            if tokens.len() != 4 {
                return Err(err(format!(
                    "{letter} element needs 'name n1 n2 value', got {} tokens",
                    tokens.len()
                )));
            }
            let value = parse_spice_value(tokens[3])
                .ok_or_else(|| err(format!("bad numeric value '{}'", tokens[3])))?;
            if value <= 0.0 {
                return Err(err(format!(
                    "{letter} value must be strictly positive, got {value}"
                )));
            }
            Element {
                kind: if letter == 'R' {
                    ElementKind::Resistor
                } else {
                    ElementKind::Capacitor
                },
                name,
                nodes: vec![tokens[1].to_string(), tokens[2].to_string()],
                value: Some(value),
                source_spec: None,
                raw: Some(raw.to_string()),
            }
        }
        'V' => {
            if tokens.len() < 4 {
                return Err(err("V element needs 'name n+ n- <spec>'".to_string()));
            }
            let rest = merged
                .splitn(4, char::is_whitespace)
                .nth(3)
                .unwrap_or("")
                .trim();
            let spec = parse_source_spec(rest).map_err(|m| err(m))?;
            Element {
                kind: ElementKind::VoltageSource,
                name,
                nodes: vec![tokens[1].to_string(), tokens[2].to_string()],
                value: None,
                source_spec: Some(spec),
                raw: Some(raw.to_string()),
            }
        }
        'M' => {
            if tokens.len() < 5 {
                return Err(err("M element needs at least four nodes".to_string()));
            }
            Element {
                kind: ElementKind::Mosfet,
                name,
                nodes: tokens[1..5].iter().map(|s| s.to_string()).collect(),
                value: None,
                source_spec: None,
                raw: Some(raw.to_string()),
            }
        }
        _ => Element {
            kind: ElementKind::Other,
            name,
            nodes: tokens[1..].iter().map(|s| s.to_string()).collect(),
            value: None,
            source_spec: None,
            raw: Some(raw.to_string()),
        },
    };
    Ok(elem)
}

/// Parse the waveform tail of a voltage-source line.
pub fn parse_source_spec(rest: &str) -> std::result::Result<WaveformSpec, String> {
    let upper = rest.trim().to_ascii_uppercase();
    let numbers = |keyword: &str| -> std::result::Result<Vec<f64>, String> {
        let body = rest.trim()[keyword.len()..]
            .replace(['(', ')', ','], " ");
        body.split_whitespace()
            .map(|tok| {
                parse_spice_value(tok).ok_or_else(|| format!("bad numeric value '{tok}'"))
            })
            .collect()
    };
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);

    let spec = if upper.starts_with("SIN") {
        let v = numbers("SIN")?;
        if v.len() < 3 {
            return Err("SIN needs at least vo, va, freq".to_string());
        }
        WaveformSpec::Sin {
            vo: v[0],
            va: v[1],
            freq: v[2],
            td: get(&v, 3),
            theta: get(&v, 4),
            phase: get(&v, 5),
        }
    } else if upper.starts_with("PULSE") {
        let v = numbers("PULSE")?;
        if v.len() < 2 {
            return Err("PULSE needs at least v1, v2".to_string());
        }
        WaveformSpec::Pulse {
            v1: v[0],
            v2: v[1],
            td: get(&v, 2),
            tr: get(&v, 3),
            tf: get(&v, 4),
            pw: get(&v, 5),
            per: get(&v, 6),
        }
    } else if upper.starts_with("EXP") {
        let v = numbers("EXP")?;
        if v.len() < 6 {
            return Err("EXP needs v1 v2 td1 tau1 td2 tau2".to_string());
        }
        WaveformSpec::Exp {
            v1: v[0],
            v2: v[1],
            td1: v[2],
            tau1: v[3],
            td2: v[4],
            tau2: v[5],
        }
    } else if upper.starts_with("DC") {
        let v = numbers("DC")?;
        if v.is_empty() {
            return Err("DC needs a level".to_string());
        }
        WaveformSpec::Dc { level: v[0] }
    } else if let Some(level) = parse_spice_value(rest) {
        WaveformSpec::Dc { level }
    } else {
        return Err(format!("unrecognized source spec '{rest}'"));
    };
    spec.validate()?;
    Ok(spec)
}
