//! Parser for ket expressions written in a small LaTeX subset, e.g.
//!
//! ```text
//! \frac{1}{2\sqrt{2}}\Big(|0\rangle_{B}\big[-\alpha(|L\rangle+i|R\rangle)|0\rangle_{A}|0\rangle_{C} + ...\big]\Big)
//! ```
//!
//! Expressions are linear in the payload amplitudes `\alpha` and `\beta`.
//! Kets carry their subsystem labels as a subscript: `|L0\rangle_{FC}`,
//! `|00\rangle_{BB_{1}}`, `|R0\rangle_{2C}` (a bare digit names photon `F1`,
//! `F2`, ...). Polarization symbols without a label are attached to the
//! context's default photon; kets without any subscript may use the
//! context's implicit label list. Layout commands (`\big`, `\Big`, `\notag`,
//! `&`, `\\`, ...) and a leading `|\psi\rangle =` are ignored. ASCII forms
//! (`|0>_A`, `a`, `b`) and the Unicode `⟩`, `α`, `β` are accepted too.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::qreg::{QregError, QuantumRegister, SubsystemKind, SubsystemLabel};

#[derive(Debug, Error, PartialEq)]
pub enum NotationError {
    #[error("unexpected `{found}` at offset {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unbalanced `{0}`")]
    Unbalanced(char),
    #[error("unknown command `\\{0}`")]
    UnknownCommand(String),
    #[error("bad ket `{0}`")]
    BadKet(String),
    #[error("cannot assign labels to ket `|{symbols}⟩` with subscript {labels:?}")]
    LabelArity {
        symbols: String,
        labels: Vec<String>,
    },
    #[error("label `{0}` appears twice in one product")]
    RepeatedLabel(String),
    #[error("product of two payload amplitudes is not linear")]
    NonLinear,
    #[error("terms span different subsystems: {0:?} vs {1:?}")]
    InconsistentLabels(Vec<String>, Vec<String>),
    #[error("label `{0}` is not part of the target register")]
    UnknownLabel(String),
    #[error("symbol `{symbol}` does not fit the {kind:?} `{label}`")]
    KindMismatch {
        label: String,
        symbol: char,
        kind: SubsystemKind,
    },
    #[error("expression evaluates to the zero vector")]
    ZeroVector,
    #[error("bad number `{0}`")]
    BadNumber(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PayloadSymbol {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: Complex64,
    pub symbol: Option<PayloadSymbol>,
    /// label -> basis symbol (`0`, `1`, `L`, `R`)
    pub kets: BTreeMap<String, char>,
}

/// A sum of monomials: a state that is linear in `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KetExpr {
    pub terms: Vec<Monomial>,
}

/// How to resolve kets whose labels are partly or wholly implicit.
#[derive(Debug, Clone, Default)]
pub struct LabelContext {
    pub default_photon: Option<String>,
    pub implicit_labels: Option<Vec<String>>,
    /// Values substituted for `\phi` and `\phi_{0}` inside `e^{i...}`.
    pub phases: Option<(f64, f64)>,
}

impl LabelContext {
    pub fn with_photon(photon: impl Into<String>) -> Self {
        Self {
            default_photon: Some(photon.into()),
            ..Self::default()
        }
    }
}

/// Components of a linear form over a fixed register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearParts {
    pub constant: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl LinearParts {
    pub fn zeros(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            constant: z.clone(),
            alpha: z.clone(),
            beta: z,
        }
    }

    pub fn instantiate(&self, alpha: Complex64, beta: Complex64) -> Vec<Complex64> {
        (0..self.constant.len())
            .map(|i| self.constant[i] + alpha * self.alpha[i] + beta * self.beta[i])
            .collect()
    }

    /// All three components concatenated.
    pub fn flat(&self) -> Vec<Complex64> {
        let mut v = self.constant.clone();
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.beta);
        v
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in [&mut self.constant, &mut self.alpha, &mut self.beta] {
            for x in v.iter_mut() {
                *x *= s;
            }
        }
    }
}

pub fn parse(src: &str, ctx: &LabelContext) -> Result<KetExpr, NotationError> {
    let cleaned = preprocess(src);
    let tokens = lex(&cleaned, ctx)?;
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.expr()?;
    if let Some((tok, offset)) = p.tokens.get(p.pos) {
        return Err(NotationError::Unexpected {
            found: format!("{tok:?}"),
            offset: *offset,
        });
    }
    Ok(KetExpr { terms: expr })
}

fn preprocess(src: &str) -> String {
    let mut s = src.replace('$', "");
    // drop \label{...}
    while let Some(start) = s.find("\\label{") {
        let end = s[start..]
            .find('}')
            .map(|e| start + e + 1)
            .unwrap_or(s.len());
        s.replace_range(start..end, "");
    }
    for cmd in [
        "\\notag",
        "\\nonumber",
        "\\\\",
        "\\Bigg",
        "\\bigg",
        "\\Big",
        "\\big",
        "\\left",
        "\\right",
        "\\,",
        "\\;",
        "\\!",
        "&",
    ] {
        s = s.replace(cmd, " ");
    }
    match s.find('=') {
        Some(eq) => s[eq + 1..].to_string(),
        None => s,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Scalar(Complex64),
    Imag,
    Sym(PayloadSymbol),
    Ket(BTreeMap<String, char>),
    Plus,
    Minus,
    Open(char),
    Close(char),
}

fn closing(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => '}',
    }
}

fn lex(s: &str, ctx: &LabelContext) -> Result<Vec<(Tok, usize)>, NotationError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() || c == '.' || c == ',' => i += 1,
            '+' => {
                out.push((Tok::Plus, start));
                i += 1;
            }
            '-' | '−' => {
                out.push((Tok::Minus, start));
                i += 1;
            }
            '(' | '[' | '{' => {
                out.push((Tok::Open(c), start));
                i += 1;
            }
            ')' | ']' | '}' => {
                out.push((Tok::Close(c), start));
                i += 1;
            }
            'i' => {
                out.push((Tok::Imag, start));
                i += 1;
            }
            'e' if chars.get(i + 1) == Some(&'^') => {
                let (exponent, next) = braced(&chars, i + 2)?;
                out.push((Tok::Scalar(phase_factor(&exponent, ctx)?), start));
                i = next;
            }
            'a' | 'α' => {
                out.push((Tok::Sym(PayloadSymbol::Alpha), start));
                i += 1;
            }
            'b' | 'β' => {
                out.push((Tok::Sym(PayloadSymbol::Beta), start));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let text = text.trim_end_matches('.');
                let v = text
                    .parse::<f64>()
                    .map_err(|_| NotationError::BadNumber(text.to_string()))?;
                out.push((Tok::Num(v), start));
            }
            '|' => {
                let (ket, next) = lex_ket(&chars, i, ctx)?;
                out.push((Tok::Ket(ket), start));
                i = next;
            }
            '\\' => {
                let (name, next) = command_name(&chars, i + 1);
                i = next;
                match name.as_str() {
                    "alpha" => out.push((Tok::Sym(PayloadSymbol::Alpha), start)),
                    "beta" => out.push((Tok::Sym(PayloadSymbol::Beta), start)),
                    "{" => out.push((Tok::Open('{'), start)),
                    "}" => out.push((Tok::Close('}'), start)),
                    "sqrt" => {
                        let (arg, next) = braced(&chars, i)?;
                        i = next;
                        out.push((Tok::Num(eval_numeric(&arg)?.sqrt()), start));
                    }
                    "frac" => {
                        let (num, next) = braced(&chars, i)?;
                        let (den, next) = braced(&chars, next)?;
                        i = next;
                        out.push((Tok::Num(eval_numeric(&num)? / eval_numeric(&den)?), start));
                    }
                    other => return Err(NotationError::UnknownCommand(other.to_string())),
                }
            }
            other => {
                return Err(NotationError::Unexpected {
                    found: other.to_string(),
                    offset: start,
                })
            }
        }
    }
    Ok(out)
}

/// Name of a `\command` starting at `i` (just past the backslash).
fn command_name(chars: &[char], i: usize) -> (String, usize) {
    if i < chars.len() && !chars[i].is_ascii_alphabetic() {
        return (chars[i].to_string(), i + 1);
    }
    let mut j = i;
    while j < chars.len() && chars[j].is_ascii_alphabetic() {
        j += 1;
    }
    (chars[i..j].iter().collect(), j)
}

/// Contents of a `{...}` group starting at `i` (whitespace allowed before
/// the brace). A single non-brace character is accepted as a one-character
/// group.
fn braced(chars: &[char], mut i: usize) -> Result<(String, usize), NotationError> {
    while i < chars.len() && chars[i].is_whitespace() {
        i += 1;
    }
    match chars.get(i) {
        None => Err(NotationError::UnexpectedEnd),
        Some('{') => {
            let mut depth = 0;
            for j in i..chars.len() {
                match chars[j] {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            return Ok((chars[i + 1..j].iter().collect(), j + 1));
                        }
                    }
                    _ => {}
                }
            }
            Err(NotationError::Unbalanced('{'))
        }
        Some(c) => Ok((c.to_string(), i + 1)),
    }
}

/// `e^{i\phi}` or `e^{i\phi_{0}}` with the context's phase values.
fn phase_factor(exponent: &str, ctx: &LabelContext) -> Result<Complex64, NotationError> {
    let compact: String = exponent.chars().filter(|c| !c.is_whitespace()).collect();
    let (phi, phi0) = ctx
        .phases
        .ok_or_else(|| NotationError::UnknownCommand("phi".to_string()))?;
    let angle = match compact.as_str() {
        "i\\phi" => phi,
        "i\\phi_{0}" | "i\\phi_0" => phi0,
        _ => return Err(NotationError::BadNumber(format!("e^{{{exponent}}}"))),
    };
    Ok(Complex64::from_polar(1.0, angle))
}

/// Evaluates a product of integers, decimals and `\sqrt{...}` factors.
fn eval_numeric(s: &str) -> Result<f64, NotationError> {
    let chars: Vec<char> = s.chars().collect();
    let mut value = 1.0;
    let mut seen = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            value *= text
                .parse::<f64>()
                .map_err(|_| NotationError::BadNumber(text.clone()))?;
            seen = true;
        } else if c == '\\' {
            let (name, next) = command_name(&chars, i + 1);
            if name != "sqrt" {
                return Err(NotationError::UnknownCommand(name));
            }
            let (arg, next) = braced(&chars, next)?;
            value *= eval_numeric(&arg)?.sqrt();
            i = next;
            seen = true;
        } else {
            return Err(NotationError::BadNumber(s.to_string()));
        }
    }
    if seen {
        Ok(value)
    } else {
        Err(NotationError::BadNumber(s.to_string()))
    }
}

fn lex_ket(
    chars: &[char],
    bar: usize,
    ctx: &LabelContext,
) -> Result<(BTreeMap<String, char>, usize), NotationError> {
    let mut i = bar + 1;
    let mut symbols = Vec::new();
    loop {
        match chars.get(i) {
            None => return Err(NotationError::UnexpectedEnd),
            Some(c) if c.is_whitespace() => i += 1,
            Some(&c @ ('0' | '1' | 'L' | 'R')) => {
                symbols.push(c);
                i += 1;
            }
            Some('>') | Some('⟩') => {
                i += 1;
                break;
            }
            Some('\\') => {
                let (name, next) = command_name(chars, i + 1);
                if name != "rangle" {
                    return Err(NotationError::BadKet(chars[bar..next].iter().collect()));
                }
                i = next;
                break;
            }
            Some(_) => return Err(NotationError::BadKet(chars[bar..=i].iter().collect())),
        }
    }
    if symbols.is_empty() {
        return Err(NotationError::BadKet(chars[bar..i].iter().collect()));
    }
    let mut labels = None;
    if chars.get(i) == Some(&'_') {
        let (sub, next) = braced(chars, i + 1)?;
        labels = Some(subscript_labels(&sub)?);
        i = next;
    }
    Ok((assign_labels(&symbols, labels, ctx)?, i))
}

/// Splits a subscript like `BB_{1}`, `2C` or `FC` into labels.
fn subscript_labels(sub: &str) -> Result<Vec<String>, NotationError> {
    let chars: Vec<char> = sub.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            out.push(format!("F{c}"));
            i += 1;
        } else if c.is_ascii_uppercase() {
            let mut name = c.to_string();
            i += 1;
            if chars.get(i) == Some(&'_') {
                let (idx, next) = braced(&chars, i + 1)?;
                name.push_str(idx.trim());
                i = next;
            }
            out.push(name);
        } else {
            return Err(NotationError::BadKet(format!("_{{{sub}}}")));
        }
    }
    Ok(out)
}

fn assign_labels(
    symbols: &[char],
    labels: Option<Vec<String>>,
    ctx: &LabelContext,
) -> Result<BTreeMap<String, char>, NotationError> {
    let arity_err = |labels: Vec<String>| NotationError::LabelArity {
        symbols: symbols.iter().collect(),
        labels,
    };
    let labels = match labels {
        Some(l) => l,
        None => match &ctx.implicit_labels {
            Some(l) if l.len() == symbols.len() => l.clone(),
            _ => Vec::new(),
        },
    };
    let mut resolved: Vec<String> = Vec::with_capacity(symbols.len());
    if labels.len() == symbols.len() {
        resolved = labels;
    } else {
        // Unlabelled polarization symbols go to the default photon; the
        // given labels fill the remaining symbols in order.
        let missing = symbols.len() - labels.len().min(symbols.len());
        let photon_slots: Vec<usize> = symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, 'L' | 'R'))
            .map(|(k, _)| k)
            .collect();
        let Some(photon) = &ctx.default_photon else {
            return Err(arity_err(labels));
        };
        if labels.len() > symbols.len() || missing != 1 || photon_slots.len() != 1 {
            return Err(arity_err(labels));
        }
        let mut given = labels.into_iter();
        for k in 0..symbols.len() {
            if k == photon_slots[0] {
                resolved.push(photon.clone());
            } else {
                resolved.push(given.next().expect("arity checked"));
            }
        }
    }
    let mut map = BTreeMap::new();
    for (label, sym) in resolved.into_iter().zip(symbols) {
        if map.insert(label.clone(), *sym).is_some() {
            return Err(NotationError::RepeatedLabel(label));
        }
    }
    Ok(map)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn expr(&mut self) -> Result<Vec<Monomial>, NotationError> {
        let mut sum = Vec::new();
        let mut sign = 1.0;
        match self.peek() {
            Some(Tok::Minus) => {
                sign = -1.0;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        loop {
            let mut term = self.term()?;
            for m in &mut term {
                m.coef *= sign;
            }
            sum.extend(term);
            match self.peek() {
                Some(Tok::Plus) => sign = 1.0,
                Some(Tok::Minus) => sign = -1.0,
                _ => return Ok(sum),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Vec<Monomial>, NotationError> {
        let mut product = vec![Monomial {
            coef: Complex64::new(1.0, 0.0),
            symbol: None,
            kets: BTreeMap::new(),
        }];
        let mut factors = 0;
        while let Some(tok) = self.peek().cloned() {
            let factor = match tok {
                Tok::Plus | Tok::Minus | Tok::Close(_) => break,
                Tok::Num(v) => {
                    self.pos += 1;
                    vec![scalar(Complex64::new(v, 0.0))]
                }
                Tok::Imag => {
                    self.pos += 1;
                    vec![scalar(Complex64::i())]
                }
                Tok::Scalar(z) => {
                    self.pos += 1;
                    vec![scalar(z)]
                }
                Tok::Sym(s) => {
                    self.pos += 1;
                    vec![Monomial {
                        coef: Complex64::new(1.0, 0.0),
                        symbol: Some(s),
                        kets: BTreeMap::new(),
                    }]
                }
                Tok::Ket(k) => {
                    self.pos += 1;
                    vec![Monomial {
                        coef: Complex64::new(1.0, 0.0),
                        symbol: None,
                        kets: k,
                    }]
                }
                Tok::Open(open) => {
                    self.pos += 1;
                    let inner = self.expr()?;
                    match self.peek() {
                        Some(Tok::Close(c)) if *c == closing(open) => self.pos += 1,
                        Some(_) | None => return Err(NotationError::Unbalanced(open)),
                    }
                    inner
                }
            };
            product = multiply(&product, &factor)?;
            factors += 1;
        }
        if factors == 0 {
            return match self.tokens.get(self.pos) {
                Some((tok, offset)) => Err(NotationError::Unexpected {
                    found: format!("{tok:?}"),
                    offset: *offset,
                }),
                None => Err(NotationError::UnexpectedEnd),
            };
        }
        Ok(product)
    }
}

fn scalar(c: Complex64) -> Monomial {
    Monomial {
        coef: c,
        symbol: None,
        kets: BTreeMap::new(),
    }
}

fn multiply(lhs: &[Monomial], rhs: &[Monomial]) -> Result<Vec<Monomial>, NotationError> {
    let mut out = Vec::with_capacity(lhs.len() * rhs.len());
    for a in lhs {
        for b in rhs {
            let symbol = match (a.symbol, b.symbol) {
                (Some(_), Some(_)) => return Err(NotationError::NonLinear),
                (s, None) | (None, s) => s,
            };
            let mut kets = a.kets.clone();
            for (label, sym) in &b.kets {
                if kets.insert(label.clone(), *sym).is_some() {
                    return Err(NotationError::RepeatedLabel(label.clone()));
                }
            }
            out.push(Monomial {
                coef: a.coef * b.coef,
                symbol,
                kets,
            });
        }
    }
    Ok(out)
}

impl KetExpr {
    /// Labels spanned by every term. Terms must agree.
    pub fn labels(&self) -> Result<BTreeSet<String>, NotationError> {
        let mut iter = self.terms.iter();
        let Some(first) = iter.next() else {
            return Ok(BTreeSet::new());
        };
        let set: BTreeSet<String> = first.kets.keys().cloned().collect();
        for m in iter {
            let other: BTreeSet<String> = m.kets.keys().cloned().collect();
            if other != set {
                return Err(NotationError::InconsistentLabels(
                    set.into_iter().collect(),
                    other.into_iter().collect(),
                ));
            }
        }
        Ok(set)
    }

    pub fn mentions_payload(&self) -> bool {
        self.terms.iter().any(|m| m.symbol.is_some())
    }

    /// Collects the expression into amplitude vectors over `layout`, which
    /// must contain exactly the expression's labels.
    pub fn linear_parts(&self, layout: &[SubsystemLabel]) -> Result<LinearParts, NotationError> {
        let labels = self.labels()?;
        for l in &labels {
            if !layout.iter().any(|s| &s.name == l) {
                return Err(NotationError::UnknownLabel(l.clone()));
            }
        }
        if let Some(s) = layout.iter().find(|s| !labels.contains(&s.name)) {
            return Err(NotationError::InconsistentLabels(
                labels.into_iter().collect(),
                vec![s.name.clone()],
            ));
        }
        let n = layout.len();
        let mut parts = LinearParts::zeros(1 << n);
        for m in &self.terms {
            let mut index = 0usize;
            for (pos, sub) in layout.iter().enumerate() {
                let sym = m.kets[&sub.name];
                let (kind, bit) = match sym {
                    '0' => (SubsystemKind::Atom, 0),
                    '1' => (SubsystemKind::Atom, 1),
                    'L' => (SubsystemKind::PhotonPolarization, 0),
                    _ => (SubsystemKind::PhotonPolarization, 1),
                };
                if kind != sub.kind {
                    return Err(NotationError::KindMismatch {
                        label: sub.name.clone(),
                        symbol: sym,
                        kind: sub.kind,
                    });
                }
                index |= bit << (n - 1 - pos);
            }
            let slot = match m.symbol {
                None => &mut parts.constant,
                Some(PayloadSymbol::Alpha) => &mut parts.alpha,
                Some(PayloadSymbol::Beta) => &mut parts.beta,
            };
            slot[index] += m.coef;
        }
        Ok(parts)
    }

    /// Normalized register for a concrete payload. The printed prefactor is
    /// discarded; use [`norm_sqr`](Self::norm_sqr) to inspect it.
    pub fn instantiate(
        &self,
        layout: &[SubsystemLabel],
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<QuantumRegister, NotationError> {
        let amps = self.linear_parts(layout)?.instantiate(alpha, beta);
        QuantumRegister::from_unnormalized(layout.to_vec(), amps).map_err(|e| match e {
            QregError::NotNormalized { .. } => NotationError::ZeroVector,
            other => NotationError::Unexpected {
                found: other.to_string(),
                offset: 0,
            },
        })
    }

    /// Squared norm of the expression as written, for a concrete payload.
    pub fn norm_sqr(
        &self,
        layout: &[SubsystemLabel],
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<f64, NotationError> {
        Ok(self
            .linear_parts(layout)?
            .instantiate(alpha, beta)
            .iter()
            .map(|a| a.norm_sqr())
            .sum())
    }
}

fn format_coef(c: Complex64, first: bool) -> String {
    let tol = 1e-9;
    let sign = |neg: bool| match (neg, first) {
        (true, _) => "−",
        (false, true) => "",
        (false, false) => "+",
    };
    if c.im.abs() < tol && (c.re.abs() - 1.0).abs() < tol {
        sign(c.re < 0.0).to_string()
    } else if c.re.abs() < tol && (c.im.abs() - 1.0).abs() < tol {
        format!("{}i", sign(c.im < 0.0))
    } else if c.im.abs() < tol {
        format!("{}{}", sign(c.re < 0.0), trim_float(c.re.abs()))
    } else if c.re.abs() < tol {
        format!("{}{}i", sign(c.im < 0.0), trim_float(c.im.abs()))
    } else {
        format!("{}({}{:+}i)", sign(false), trim_float(c.re), c.im)
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Renders a linear form over `layout` in ket notation, e.g.
/// `α|01⟩_{AD} − β|10⟩_{AD}`. Coefficients below `1e-9` are dropped.
pub fn render_linear(layout: &[SubsystemLabel], parts: &LinearParts) -> String {
    let n = layout.len();
    let subscript: String = layout
        .iter()
        .map(|s| s.name.as_str())
        .collect::<Vec<_>>()
        .join(",");
    let mut out = String::new();
    for (sym, vec) in [
        ("", &parts.constant),
        ("α", &parts.alpha),
        ("β", &parts.beta),
    ] {
        for (index, c) in vec.iter().enumerate() {
            if c.norm() < 1e-9 {
                continue;
            }
            let ket: String = layout
                .iter()
                .enumerate()
                .map(|(pos, s)| s.kind.bit_symbol(((index >> (n - 1 - pos)) & 1) as u8))
                .collect();
            let coef = format_coef(*c, out.is_empty());
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "{coef}{sym}|{ket}⟩_{{{subscript}}}");
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
