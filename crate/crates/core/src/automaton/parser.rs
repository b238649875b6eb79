use std::collections::HashMap;

use thiserror::Error;

use super::{AffineFlow, AffineReset, HybridAutomaton, Jump, Location, Model, ReachSettings, UnsafeSpec};
use crate::geometry::Condition;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("nonlinear term")]
    NonlinearTerm,
    #[error("unresolved location `{0}`")]
    UnresolvedLocation(String),
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("invalid setting: {0}")]
    Setting(String),
}

/// Diagnostic with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 19] = [
    "->", ":=", "<=", ">=", "==", ";", ",", "{", "}", "(", ")", "'", "=", "<", ">", "+", "-", "*", "/",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                .collect();
            i += s.len();
            col += s.len();
            out.push(Token {
                tok: Tok::Ident(s),
                line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            })?;
            col += j - i;
            i = j;
            out.push(Token {
                tok: Tok::Num(value),
                line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token {
                    tok: Tok::Sym(s),
                    line,
                    col: start_col,
                });
            }
            None => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// `Σ coeffs·x + constant`.
#[derive(Debug, Clone)]
struct LinExpr {
    coeffs: Vec<f64>,
    constant: f64,
}

impl LinExpr {
    fn constant(n: usize, c: f64) -> Self {
        LinExpr {
            coeffs: vec![0.0; n],
            constant: c,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn scale(mut self, k: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    fn add(mut self, other: &LinExpr, sign: f64) -> Self {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += sign * o;
        }
        self.constant += sign * other.constant;
        self
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    var_ix: HashMap<String, usize>,
}

type PResult<T> = Result<T, ParseError>;

/// Parses a model file into a validated automaton, its analysis settings
/// and its unsafe sets.
pub fn parse_model(src: &str) -> Result<Model, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars: Vec::new(),
        var_ix: HashMap::new(),
    };
    p.model()
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, t: &Token, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError {
            line: t.line,
            col: t.col,
            kind,
        })
    }

    fn syntax<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        self.err_at(t, ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.syntax(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.next();
            Ok(())
        } else {
            self.syntax(&format!("`{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next()))
            }
            _ => self.syntax("identifier"),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let neg = self.eat_sym("-");
        match self.peek().tok {
            Tok::Num(x) => {
                self.next();
                Ok(if neg { -x } else { x })
            }
            _ => self.syntax("number"),
        }
    }

    fn model(&mut self) -> PResult<Model> {
        self.expect_kw("vars")?;
        loop {
            let (name, tok) = self.ident()?;
            if self.var_ix.contains_key(&name) {
                return self.err_at(
                    &tok,
                    ParseErrorKind::Dimension(format!("variable `{name}` declared twice")),
                );
            }
            self.var_ix.insert(name.clone(), self.vars.len());
            self.vars.push(name);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        let n = self.vars.len();

        let mut settings: Option<(ReachSettings, bool)> = None;
        let mut locations: Vec<(Location, Token)> = Vec::new();
        let mut jumps: Vec<(Jump, Token, Token)> = Vec::new();
        let mut init: Vec<(String, Condition, Token)> = Vec::new();
        let mut unsafe_entries: Vec<(Option<String>, Condition, Token)> = Vec::new();
        let start = self.peek().clone();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "settings" => {
                    if settings.is_some() {
                        return self.err_at(&t, ParseErrorKind::Setting("settings given twice".into()));
                    }
                    self.next();
                    settings = Some(self.settings()?);
                }
                Tok::Ident(kw) if kw == "location" => {
                    self.next();
                    let (name, tok) = self.ident()?;
                    if locations.iter().any(|(l, _)| l.name == name) {
                        return self.err_at(
                            &tok,
                            ParseErrorKind::Syntax(format!("location `{name}` declared twice")),
                        );
                    }
                    let loc = self.location(name)?;
                    locations.push((loc, tok));
                }
                Tok::Ident(kw) if kw == "jump" => {
                    self.next();
                    let (source, stok) = self.ident()?;
                    self.expect_sym("->")?;
                    let (target, ttok) = self.ident()?;
                    let j = self.jump(source, target)?;
                    jumps.push((j, stok, ttok));
                }
                Tok::Ident(kw) if kw == "init" => {
                    self.next();
                    let (loc, tok) = self.ident()?;
                    let c = self.condition_block()?;
                    init.push((loc, c, tok));
                }
                Tok::Ident(kw) if kw == "unsafe" => {
                    self.next();
                    let (loc, tok) = if self.is_sym("*") {
                        (None, self.next())
                    } else {
                        let (l, tok) = self.ident()?;
                        (Some(l), tok)
                    };
                    let c = self.condition_block()?;
                    unsafe_entries.push((loc, c, tok));
                }
                _ => return self.syntax("`settings`, `location`, `jump`, `init` or `unsafe`"),
            }
        }

        let resolve = |name: &str, tok: &Token| -> PResult<()> {
            if locations.iter().any(|(l, _)| l.name == name) {
                Ok(())
            } else {
                Err(ParseError {
                    line: tok.line,
                    col: tok.col,
                    kind: ParseErrorKind::UnresolvedLocation(name.to_string()),
                })
            }
        };
        for (j, s, t) in &jumps {
            resolve(&j.source, s)?;
            resolve(&j.target, t)?;
        }
        for (l, _, tok) in &init {
            resolve(l, tok)?;
        }
        for (l, _, tok) in &unsafe_entries {
            if let Some(l) = l {
                resolve(l, tok)?;
            }
        }
        if locations.is_empty() {
            return self.err_at(&start, ParseErrorKind::Syntax("model declares no location".into()));
        }
        if init.is_empty() {
            return self.err_at(
                &start,
                ParseErrorKind::Syntax("model declares no initial condition".into()),
            );
        }
        let settings = match settings {
            Some((s, true)) => s,
            _ => return self.err_at(&start, ParseErrorKind::Setting("`horizon` is required".into())),
        };
        let automaton = HybridAutomaton {
            vars: self.vars.clone(),
            locations: locations.into_iter().map(|(l, _)| l).collect(),
            jumps: jumps.into_iter().map(|(j, _, _)| j).collect(),
            init: init.into_iter().map(|(l, c, _)| (l, c)).collect(),
        };
        let diags = super::validate(&automaton);
        if let Some(d) = diags.first() {
            return self.err_at(&start, ParseErrorKind::Dimension(d.clone()));
        }
        debug_assert_eq!(automaton.dim(), n);
        Ok(Model {
            automaton,
            settings,
            unsafe_spec: UnsafeSpec {
                entries: unsafe_entries.into_iter().map(|(l, c, _)| (l, c)).collect(),
            },
        })
    }

    /// Returns the settings and whether a horizon was given.
    fn settings(&mut self) -> PResult<(ReachSettings, bool)> {
        let mut s = ReachSettings::new(0.0);
        let mut has_horizon = false;
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            let (key, tok) = self.ident()?;
            let bad = |msg: String| ParseError {
                line: tok.line,
                col: tok.col,
                kind: ParseErrorKind::Setting(msg),
            };
            match key.as_str() {
                "delta" => {
                    s.delta = self.number()?;
                    if !(s.delta > 0.0 && s.delta.is_finite()) {
                        return Err(bad("delta must be positive".into()));
                    }
                }
                "horizon" => {
                    s.horizon = self.number()?;
                    if !(s.horizon > 0.0 && s.horizon.is_finite()) {
                        return Err(bad("horizon must be positive".into()));
                    }
                    has_horizon = true;
                }
                "depth" => {
                    if self.is_kw("unbounded") {
                        self.next();
                        s.depth = None;
                    } else {
                        let d = self.number()?;
                        if d < 0.0 || d.fract() != 0.0 {
                            return Err(bad("depth must be a non-negative integer or `unbounded`".into()));
                        }
                        s.depth = Some(d as usize);
                    }
                }
                "aggregation" => {
                    let (v, _) = self.ident()?;
                    s.aggregation = match v.as_str() {
                        "on" => true,
                        "off" => false,
                        _ => return Err(bad(format!("aggregation must be `on` or `off`, found `{v}`"))),
                    };
                }
                "decompose" => {
                    let (v, _) = self.ident()?;
                    s.decomposition = v.parse().map_err(bad)?;
                }
                "rep" => {
                    let (v, _) = self.ident()?;
                    s.representation = v.parse().map_err(bad)?;
                }
                other => return Err(bad(format!("unknown setting `{other}`"))),
            }
            self.expect_sym(";")?;
        }
        Ok((s, has_horizon))
    }

    fn location(&mut self, name: String) -> PResult<Location> {
        let n = self.vars.len();
        let mut flow = AffineFlow::zero(n);
        let mut assigned = vec![false; n];
        let mut invariant = Condition::truth(n);
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            if self.is_kw("flow") {
                self.next();
                let (v, tok) = self.ident()?;
                let i = self.var(&v, &tok)?;
                if assigned[i] {
                    return self.err_at(&tok, ParseErrorKind::Syntax(format!("flow of `{v}` given twice")));
                }
                assigned[i] = true;
                self.expect_sym("'")?;
                self.expect_sym("=")?;
                let e = self.expr()?;
                flow.a.row_mut(i).copy_from_slice(&e.coeffs);
                flow.b[i] = e.constant;
            } else if self.is_kw("inv") {
                self.next();
                self.constraint(&mut invariant)?;
            } else {
                return self.syntax("`flow`, `inv` or `}`");
            }
            self.expect_sym(";")?;
        }
        Ok(Location { name, flow, invariant })
    }

    fn jump(&mut self, source: String, target: String) -> PResult<Jump> {
        let n = self.vars.len();
        let mut guard = Condition::truth(n);
        let mut reset = AffineReset::identity(n);
        let mut assigned = vec![false; n];
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            if self.is_kw("guard") {
                self.next();
                self.constraint(&mut guard)?;
            } else if self.is_kw("reset") {
                self.next();
                let (v, tok) = self.ident()?;
                let i = self.var(&v, &tok)?;
                if assigned[i] {
                    return self.err_at(&tok, ParseErrorKind::Syntax(format!("reset of `{v}` given twice")));
                }
                assigned[i] = true;
                self.expect_sym(":=")?;
                let e = self.expr()?;
                reset.a.row_mut(i).copy_from_slice(&e.coeffs);
                reset.c[i] = e.constant;
            } else {
                return self.syntax("`guard`, `reset` or `}`");
            }
            self.expect_sym(";")?;
        }
        Ok(Jump {
            source,
            target,
            guard,
            reset,
        })
    }

    fn condition_block(&mut self) -> PResult<Condition> {
        let mut c = Condition::truth(self.vars.len());
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            self.constraint(&mut c)?;
            self.expect_sym(";")?;
        }
        Ok(c)
    }

    /// `e₀ op e₁ op e₂ …` with `op ∈ {<=, >=, =, <, >}`.
    fn constraint(&mut self, out: &mut Condition) -> PResult<()> {
        let mut lhs = self.expr()?;
        let mut any = false;
        loop {
            let op = match &self.peek().tok {
                Tok::Sym(s @ ("<=" | ">=" | "=" | "==" | "<" | ">")) => *s,
                _ => break,
            };
            self.next();
            let rhs = self.expr()?;
            let diff = lhs.clone().add(&rhs, -1.0);
            match op {
                "<=" | "<" => push_le(out, &diff),
                ">=" | ">" => push_le(out, &diff.clone().scale(-1.0)),
                _ => {
                    push_le(out, &diff);
                    push_le(out, &diff.clone().scale(-1.0));
                }
            }
            any = true;
            lhs = rhs;
        }
        if !any {
            return self.syntax("comparison operator");
        }
        Ok(())
    }

    fn var(&self, name: &str, tok: &Token) -> PResult<usize> {
        match self.var_ix.get(name) {
            Some(&i) => Ok(i),
            None => self.err_at(tok, ParseErrorKind::UnknownVariable(name.to_string())),
        }
    }

    fn expr(&mut self) -> PResult<LinExpr> {
        let mut e = self.term()?;
        loop {
            let sign = if self.eat_sym("+") {
                1.0
            } else if self.eat_sym("-") {
                -1.0
            } else {
                break;
            };
            let t = self.term()?;
            e = e.add(&t, sign);
        }
        Ok(e)
    }

    fn term(&mut self) -> PResult<LinExpr> {
        let mut e = self.factor()?;
        while self.is_sym("*") || self.is_sym("/") {
            let tok = self.next();
            let f = self.factor()?;
            let divide = matches!(tok.tok, Tok::Sym("/"));
            e = if divide {
                if !f.is_constant() {
                    return self.err_at(&tok, ParseErrorKind::NonlinearTerm);
                }
                e.scale(1.0 / f.constant)
            } else if e.is_constant() {
                f.scale(e.constant)
            } else if f.is_constant() {
                e.scale(f.constant)
            } else {
                return self.err_at(&tok, ParseErrorKind::NonlinearTerm);
            };
        }
        Ok(e)
    }

    fn factor(&mut self) -> PResult<LinExpr> {
        let n = self.vars.len();
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(x) => {
                self.next();
                Ok(LinExpr::constant(n, *x))
            }
            Tok::Ident(name) => {
                let i = self.var(name, &t)?;
                self.next();
                let mut e = LinExpr::constant(n, 0.0);
                e.coeffs[i] = 1.0;
                Ok(e)
            }
            Tok::Sym("-") => {
                self.next();
                Ok(self.factor()?.scale(-1.0))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.syntax("number, variable or `(`"),
        }
    }
}

fn push_le(out: &mut Condition, diff: &LinExpr) {
    // coeffs·x + constant ≤ 0
    out.push(&diff.coeffs, -diff.constant);
}
