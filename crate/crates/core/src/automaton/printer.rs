use std::fmt::{self, Write};

use super::Model;
use crate::geometry::Condition;

/// `Σ aᵢ·xᵢ + c` in model syntax; `0` when every term vanishes.
fn linear(coeffs: &[f64], constant: f64, vars: &[String]) -> String {
    let mut s = String::new();
    for (a, v) in coeffs.iter().zip(vars) {
        if *a == 0.0 {
            continue;
        }
        let (neg, mag) = (a.is_sign_negative(), a.abs());
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mag == 1.0 {
            s.push_str(v);
        } else {
            let _ = write!(s, "{mag:?}*{v}");
        }
    }
    if constant != 0.0 || s.is_empty() {
        if s.is_empty() {
            let _ = write!(s, "{constant:?}");
        } else {
            let _ = write!(s, " {} {:?}", if constant < 0.0 { "-" } else { "+" }, constant.abs());
        }
    }
    s
}

fn rows(f: &mut fmt::Formatter<'_>, indent: &str, prefix: &str, c: &Condition, vars: &[String]) -> fmt::Result {
    for (r, b) in c.rows() {
        writeln!(f, "{indent}{prefix}{} <= {b:?};", linear(r, 0.0, vars))?;
    }
    Ok(())
}

/// Model syntax that parses back to an identical model.
impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.automaton;
        let s = &self.settings;
        writeln!(f, "vars {};", h.vars.join(", "))?;
        writeln!(f, "settings {{")?;
        writeln!(f, "  delta {:?};", s.delta)?;
        writeln!(f, "  horizon {:?};", s.horizon)?;
        match s.depth {
            Some(d) => writeln!(f, "  depth {d};")?,
            None => writeln!(f, "  depth unbounded;")?,
        }
        writeln!(f, "  aggregation {};", if s.aggregation { "on" } else { "off" })?;
        writeln!(f, "  decompose {};", s.decomposition)?;
        writeln!(f, "  rep {};", s.representation)?;
        writeln!(f, "}}")?;
        for l in &h.locations {
            writeln!(f, "location {} {{", l.name)?;
            for (i, v) in h.vars.iter().enumerate() {
                if !l.flow.is_constant(i) {
                    writeln!(f, "  flow {v}' = {};", linear(l.flow.a.row(i), l.flow.b[i], &h.vars))?;
                }
            }
            rows(f, "  ", "inv ", &l.invariant, &h.vars)?;
            writeln!(f, "}}")?;
        }
        for j in &h.jumps {
            writeln!(f, "jump {} -> {} {{", j.source, j.target)?;
            rows(f, "  ", "guard ", &j.guard, &h.vars)?;
            for (i, v) in h.vars.iter().enumerate() {
                if !j.reset.keeps(i) {
                    writeln!(f, "  reset {v} := {};", linear(j.reset.a.row(i), j.reset.c[i], &h.vars))?;
                }
            }
            writeln!(f, "}}")?;
        }
        for (l, c) in &h.init {
            writeln!(f, "init {l} {{")?;
            rows(f, "  ", "", c, &h.vars)?;
            writeln!(f, "}}")?;
        }
        for (l, c) in &self.unsafe_spec.entries {
            writeln!(f, "unsafe {} {{", l.as_deref().unwrap_or("*"))?;
            rows(f, "  ", "", c, &h.vars)?;
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
