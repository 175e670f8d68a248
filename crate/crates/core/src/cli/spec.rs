//! The line-oriented field specification format.
//!
//! ```text
//! [coords]
//! t r theta phi
//! [params]
//! M = 1
//! [tetrad]
//! e 0 t = sqrt(1 - 2*M/r)
//! [domain]
//! r in (3, 8)
//! ```
//!
//! Other sections: `[spin]` (`w I MU NU = expr`, replaces the induced
//! connection), `[lorentz]` (`L MU NU = expr`, unspecified entries from the
//! identity), `[coordchange]` (`bar A = expr` in old coordinates and
//! `inv I = expr` in new ones, both complete), `[vectorfield]` (`eps I`,
//! `D MU NU`, `G MU Q`), `[expect]` (`check = pass|fail`) and `[unknowns]`
//! (`name = start`). Latin indices may be given as coordinate names. `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::exprdsl::{parse_with, Expr, ParamEnv, ParseContext, ParseError};
use crate::geometry::{Domain, TetradField};
use crate::tensor::PAIRS;
use crate::transforms::{CoordChange, JVectorField, LorentzField};
use crate::variational::Section;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Missing(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordSpec {
    pub forward: [Expr; 4],
    pub inverse: [Expr; 4],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorSpec {
    pub eps: BTreeMap<usize, Expr>,
    pub d: BTreeMap<(usize, usize), Expr>,
    pub g: BTreeMap<(usize, usize), Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub coords: [String; 4],
    pub params: Vec<(String, f64)>,
    pub unknowns: Vec<(String, f64)>,
    pub tetrad: BTreeMap<(usize, usize), Expr>,
    /// `(i, mu, nu)` with mu < nu.
    pub spin: BTreeMap<(usize, usize, usize), Expr>,
    pub domain: [Option<(f64, f64)>; 4],
    pub lorentz: BTreeMap<(usize, usize), Expr>,
    pub coordchange: Option<CoordSpec>,
    pub vectorfield: Option<VectorSpec>,
    pub expect: BTreeMap<String, Expectation>,
}

const SECTIONS: [&str; 10] = [
    "coords",
    "params",
    "unknowns",
    "tetrad",
    "spin",
    "domain",
    "lorentz",
    "coordchange",
    "vectorfield",
    "expect",
];

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax {
        line,
        message: message.into(),
    }
}

fn split_assign<'a>(l: &Line<'a>) -> Result<(&'a str, &'a str), SpecError> {
    l.text
        .split_once('=')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| err(l.no, "expected `lhs = value`"))
}

fn number(line: usize, s: &str) -> Result<f64, SpecError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("expected a number, found `{}`", s.trim())))
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut sections: BTreeMap<&str, Vec<Line>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (k, raw) in text.lines().enumerate() {
            let no = k + 1;
            let t = raw.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                let known = SECTIONS
                    .iter()
                    .find(|s| **s == name)
                    .ok_or_else(|| err(no, format!("unknown section [{name}]")))?;
                if sections.contains_key(known) {
                    return Err(err(no, format!("section [{name}] appears twice")));
                }
                sections.insert(known, Vec::new());
                current = Some(known);
                continue;
            }
            let sec = current.ok_or_else(|| err(no, "content before the first section header"))?;
            sections.get_mut(sec).unwrap().push(Line { no, text: t });
        }

        let coords = match sections.get("coords") {
            None => ["x0", "x1", "x2", "x3"].map(String::from),
            Some(lines) => {
                let names: Vec<&str> = lines.iter().flat_map(|l| l.text.split_whitespace()).collect();
                let first = lines.first().map_or(0, |l| l.no);
                if names.len() != 4 {
                    return Err(err(first, format!("expected 4 coordinate names, found {}", names.len())));
                }
                for (a, n) in names.iter().enumerate() {
                    if !n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                        || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    {
                        return Err(err(first, format!("invalid coordinate name `{n}`")));
                    }
                    if names[..a].contains(n) {
                        return Err(err(first, format!("duplicate coordinate `{n}`")));
                    }
                }
                std::array::from_fn(|i| names[i].to_string())
            }
        };

        let read_values = |name: &str| -> Result<Vec<(String, f64)>, SpecError> {
            let mut out: Vec<(String, f64)> = Vec::new();
            for l in sections.get(name).map_or(&[][..], |v| v.as_slice()) {
                let (k, v) = split_assign(l)?;
                if k.is_empty() || k.contains(char::is_whitespace) {
                    return Err(err(l.no, format!("invalid name `{k}`")));
                }
                if coords.iter().any(|c| c == k) || out.iter().any(|(n, _)| n == k) {
                    return Err(err(l.no, format!("`{k}` is already declared")));
                }
                out.push((k.to_string(), number(l.no, v)?));
            }
            Ok(out)
        };
        let params = read_values("params")?;
        let unknowns = read_values("unknowns")?;
        if let Some((n, _)) = unknowns.iter().find(|(n, _)| params.iter().any(|(p, _)| p == n)) {
            return Err(SpecError::Missing(format!("`{n}` is both a parameter and an unknown")));
        }
        let ctx = ParseContext {
            coords: coords.clone(),
            params: Some(params.iter().chain(&unknowns).map(|(n, _)| n.clone()).collect()),
        };

        let latin = |line: usize, tok: &str| -> Result<usize, SpecError> {
            if let Some(i) = coords.iter().position(|c| c == tok) {
                return Ok(i);
            }
            tok.parse::<usize>()
                .ok()
                .filter(|&i| i < 4)
                .ok_or_else(|| err(line, format!("expected an index 0..3 or a coordinate name, found `{tok}`")))
        };
        let greek = |line: usize, tok: &str| -> Result<usize, SpecError> {
            tok.parse::<usize>()
                .ok()
                .filter(|&i| i < 4)
                .ok_or_else(|| err(line, format!("expected a frame index 0..3, found `{tok}`")))
        };
        let expr = |l: &Line, s: &str| -> Result<Expr, SpecError> {
            parse_with(s, &ctx).map_err(|source| SpecError::Expr { line: l.no, source })
        };
        // `head` tokens: tag followed by indices
        let entry = |l: &Line, tag: &str, kinds: &[bool]| -> Result<(Vec<usize>, Expr), SpecError> {
            let (lhs, rhs) = split_assign(l)?;
            let toks: Vec<&str> = lhs.split_whitespace().collect();
            if toks.first() != Some(&tag) || toks.len() != kinds.len() + 1 {
                return Err(err(l.no, format!("expected `{tag}` followed by {} indices", kinds.len())));
            }
            let mut idx = Vec::new();
            for (t, &is_latin) in toks[1..].iter().zip(kinds) {
                idx.push(if is_latin { latin(l.no, t)? } else { greek(l.no, t)? });
            }
            Ok((idx, expr(l, rhs)?))
        };
        let lines = |name: &str| sections.get(name).map_or(&[][..], |v| v.as_slice());

        let mut tetrad = BTreeMap::new();
        for l in lines("tetrad") {
            let (i, e) = entry(l, "e", &[false, true])?;
            if tetrad.insert((i[0], i[1]), e).is_some() {
                return Err(err(l.no, "duplicate tetrad entry"));
            }
        }
        if tetrad.is_empty() {
            return Err(SpecError::Missing("no [tetrad] entries".into()));
        }

        let mut spin = BTreeMap::new();
        for l in lines("spin") {
            let (i, e) = entry(l, "w", &[true, false, false])?;
            let (a, b) = (i[1], i[2]);
            if a == b {
                return Err(err(l.no, "spin components are antisymmetric; diagonal entries must be omitted"));
            }
            let (key, e) = if a < b { ((i[0], a, b), e) } else { ((i[0], b, a), Expr::raw_neg(e)) };
            if spin.insert(key, e).is_some() {
                return Err(err(l.no, "duplicate spin entry"));
            }
        }

        let mut domain = [None; 4];
        for l in lines("domain") {
            let (name, rest) = l.text.split_once(" in ").ok_or_else(|| err(l.no, "expected `coord in (a, b)`"))?;
            let k = latin(l.no, name.trim())?;
            let inner = rest
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(l.no, "expected an open interval `(a, b)`"))?;
            let (a, b) = inner.split_once(',').ok_or_else(|| err(l.no, "expected `(a, b)`"))?;
            let (a, b) = (number(l.no, a)?, number(l.no, b)?);
            if !(a < b) {
                return Err(err(l.no, "empty interval"));
            }
            if domain[k].replace((a, b)).is_some() {
                return Err(err(l.no, "duplicate domain entry"));
            }
        }

        let mut lorentz = BTreeMap::new();
        for l in lines("lorentz") {
            let (i, e) = entry(l, "L", &[false, false])?;
            if lorentz.insert((i[0], i[1]), e).is_some() {
                return Err(err(l.no, "duplicate Lorentz entry"));
            }
        }

        let coordchange = if sections.contains_key("coordchange") {
            let mut fwd: [Option<Expr>; 4] = Default::default();
            let mut inv: [Option<Expr>; 4] = Default::default();
            for l in lines("coordchange") {
                let tag = l.text.split_whitespace().next().unwrap_or("");
                let (i, e) = match tag {
                    "bar" => entry(l, "bar", &[true])?,
                    "inv" => entry(l, "inv", &[true])?,
                    _ => return Err(err(l.no, "expected `bar I = expr` or `inv I = expr`")),
                };
                let slot = if tag == "bar" { &mut fwd[i[0]] } else { &mut inv[i[0]] };
                if slot.replace(e).is_some() {
                    return Err(err(l.no, "duplicate coordinate-change entry"));
                }
            }
            if fwd.iter().chain(&inv).any(Option::is_none) {
                return Err(SpecError::Missing("[coordchange] needs all four `bar` and `inv` components".into()));
            }
            Some(CoordSpec {
                forward: fwd.map(Option::unwrap),
                inverse: inv.map(Option::unwrap),
            })
        } else {
            None
        };

        let vectorfield = if sections.contains_key("vectorfield") {
            let mut v = VectorSpec::default();
            for l in lines("vectorfield") {
                let tag = l.text.split_whitespace().next().unwrap_or("");
                let dup = match tag {
                    "eps" => {
                        let (i, e) = entry(l, "eps", &[true])?;
                        v.eps.insert(i[0], e).is_some()
                    }
                    "D" => {
                        let (i, e) = entry(l, "D", &[false, false])?;
                        v.d.insert((i[0], i[1]), e).is_some()
                    }
                    "G" => {
                        let (i, e) = entry(l, "G", &[false, true])?;
                        v.g.insert((i[0], i[1]), e).is_some()
                    }
                    _ => return Err(err(l.no, "expected `eps I`, `D MU NU` or `G MU Q`")),
                };
                if dup {
                    return Err(err(l.no, "duplicate vector-field entry"));
                }
            }
            Some(v)
        } else {
            None
        };

        let mut expect = BTreeMap::new();
        for l in lines("expect") {
            let (k, v) = split_assign(l)?;
            let e = match v {
                "pass" => Expectation::Pass,
                "fail" => Expectation::Fail,
                _ => return Err(err(l.no, "expected `pass` or `fail`")),
            };
            if expect.insert(k.to_string(), e).is_some() {
                return Err(err(l.no, "duplicate expectation"));
            }
        }

        Ok(SpecFile {
            coords,
            params,
            unknowns,
            tetrad,
            spin,
            domain,
            lorentz,
            coordchange,
            vectorfield,
            expect,
        })
    }

    pub fn param_env(&self) -> ParamEnv {
        let mut p = ParamEnv::new();
        for (n, v) in self.params.iter().chain(&self.unknowns) {
            p.set(n, *v);
        }
        p
    }

    pub fn domain(&self) -> Domain {
        Domain::new(std::array::from_fn(|k| {
            self.domain[k].unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
        }))
    }

    pub fn tetrad_field(&self) -> TetradField {
        let e = std::array::from_fn(|m| {
            std::array::from_fn(|i| self.tetrad.get(&(m, i)).cloned().unwrap_or_else(Expr::zero))
        });
        TetradField::new(e, self.param_env(), self.domain())
    }

    pub fn section(&self) -> Section {
        let f = self.tetrad_field();
        if self.spin.is_empty() {
            return Section::induced(f);
        }
        let w = std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                let (a, b) = PAIRS[k];
                self.spin.get(&(i, a, b)).cloned().unwrap_or_else(Expr::zero)
            })
        });
        Section::explicit(f, w)
    }

    pub fn lorentz_field(&self) -> Option<LorentzField> {
        if self.lorentz.is_empty() {
            return None;
        }
        let l = std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                self.lorentz.get(&(m, n)).cloned().unwrap_or_else(|| {
                    if m == n {
                        Expr::one()
                    } else {
                        Expr::zero()
                    }
                })
            })
        });
        Some(LorentzField::new(l, self.param_env()))
    }

    pub fn coord_change(&self) -> Option<CoordChange> {
        self.coordchange
            .as_ref()
            .map(|c| CoordChange::new(c.forward.clone(), c.inverse.clone(), self.param_env()))
    }

    pub fn vector_field(&self) -> Option<JVectorField> {
        let v = self.vectorfield.as_ref()?;
        let get2 = |m: &BTreeMap<(usize, usize), Expr>| -> [[Expr; 4]; 4] {
            std::array::from_fn(|a| std::array::from_fn(|b| m.get(&(a, b)).cloned().unwrap_or_else(Expr::zero)))
        };
        Some(JVectorField::new(
            std::array::from_fn(|i| v.eps.get(&i).cloned().unwrap_or_else(Expr::zero)),
            get2(&v.d),
            get2(&v.g),
            self.param_env(),
        ))
    }

    pub fn expectation(&self, check: &str) -> Expectation {
        self.expect.get(check).copied().unwrap_or(Expectation::Pass)
    }

    /// Canonical text: fixed section order, sorted entries, printed
    /// expressions. Parsing it yields a value equal to `self`.
    pub fn normalized(&self) -> String {
        let mut s = String::new();
        let c = &self.coords;
        let name = |i: usize| c[i].clone();
        let _ = writeln!(s, "[coords]\n{}", c.join(" "));
        let values = |s: &mut String, title: &str, v: &[(String, f64)]| {
            if !v.is_empty() {
                let _ = writeln!(s, "\n[{title}]");
                for (n, x) in v {
                    let _ = writeln!(s, "{n} = {x:?}");
                }
            }
        };
        values(&mut s, "params", &self.params);
        values(&mut s, "unknowns", &self.unknowns);
        let _ = writeln!(s, "\n[tetrad]");
        for ((m, i), e) in &self.tetrad {
            let _ = writeln!(s, "e {m} {} = {}", name(*i), e.display_with(c));
        }
        if !self.spin.is_empty() {
            let _ = writeln!(s, "\n[spin]");
            for ((i, a, b), e) in &self.spin {
                let _ = writeln!(s, "w {} {a} {b} = {}", name(*i), e.display_with(c));
            }
        }
        if self.domain.iter().any(Option::is_some) {
            let _ = writeln!(s, "\n[domain]");
            for (k, d) in self.domain.iter().enumerate() {
                if let Some((a, b)) = d {
                    let _ = writeln!(s, "{} in ({a:?}, {b:?})", name(k));
                }
            }
        }
        if !self.lorentz.is_empty() {
            let _ = writeln!(s, "\n[lorentz]");
            for ((m, n), e) in &self.lorentz {
                let _ = writeln!(s, "L {m} {n} = {}", e.display_with(c));
            }
        }
        if let Some(cc) = &self.coordchange {
            let _ = writeln!(s, "\n[coordchange]");
            for (i, e) in cc.forward.iter().enumerate() {
                let _ = writeln!(s, "bar {} = {}", name(i), e.display_with(c));
            }
            for (i, e) in cc.inverse.iter().enumerate() {
                let _ = writeln!(s, "inv {} = {}", name(i), e.display_with(c));
            }
        }
        if let Some(v) = &self.vectorfield {
            let _ = writeln!(s, "\n[vectorfield]");
            for (i, e) in &v.eps {
                let _ = writeln!(s, "eps {} = {}", name(*i), e.display_with(c));
            }
            for ((m, n), e) in &v.d {
                let _ = writeln!(s, "D {m} {n} = {}", e.display_with(c));
            }
            for ((m, q), e) in &v.g {
                let _ = writeln!(s, "G {m} {} = {}", name(*q), e.display_with(c));
            }
        }
        if !self.expect.is_empty() {
            let _ = writeln!(s, "\n[expect]");
            for (k, e) in &self.expect {
                let v = if *e == Expectation::Pass { "pass" } else { "fail" };
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}
