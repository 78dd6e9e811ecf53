//! Export of an LP instance in CPLEX LP text format.

use std::fmt::Write;

use echelon_core::lp::{Cmp, LpInstance};

fn term(out: &mut String, coef: f64, name: &str, first: bool) {
    let sign = if coef < 0.0 { "-" } else if first { "" } else { "+" };
    let mag = coef.abs();
    if mag == 1.0 {
        let _ = write!(out, " {sign} {name}");
    } else {
        let _ = write!(out, " {sign} {mag} {name}");
    }
}

fn wrap_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut line_len = 0;
    let mut first = true;
    for (c, name) in terms {
        let before = out.len();
        term(out, c, &name, first);
        first = false;
        line_len += out.len() - before;
        if line_len > 200 {
            out.push_str("\n   ");
            line_len = 0;
        }
    }
    if first {
        out.push_str(" 0");
    }
}

pub fn to_lp_format(inst: &LpInstance, title: &str) -> String {
    let map = inst.map;
    let mut out = format!("\\ {title}\nMinimize\n obj:");
    wrap_terms(&mut out, inst.cost.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(v, &c)| (c, map.name(v))));
    out.push_str("\nSubject To\n");
    for row in &inst.rows {
        let _ = write!(out, " {}:", row.name);
        wrap_terms(&mut out, row.terms.iter().map(|&(v, a)| (a, map.name(v))));
        let op = match row.cmp {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for v in 0..inst.num_vars() {
        let (lo, hi) = (inst.lower[v], inst.upper[v]);
        let name = map.name(v);
        if hi.is_infinite() {
            if lo != 0.0 {
                let _ = writeln!(out, " {name} >= {lo}");
            }
        } else {
            let _ = writeln!(out, " {lo} <= {name} <= {hi}");
        }
    }
    out.push_str("End\n");
    out
}
