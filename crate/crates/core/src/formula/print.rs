use std::fmt::{self, Write};

use super::{Formula, FormulaKind};

// Binary connectives are always parenthesized. A quantifier swallows
// everything to its right, so it is parenthesized unless it sits in tail
// position (nothing follows before a closing paren or end of input).
pub(super) fn write_formula(out: &mut impl Write, f: &Formula) -> fmt::Result {
    write_node(out, f, true)
}

fn write_node(out: &mut impl Write, f: &Formula, tail: bool) -> fmt::Result {
    match f.kind() {
        FormulaKind::Atom(a) => {
            out.write_str(&a.letter)?;
            if !a.args.is_empty() {
                out.write_char('(')?;
                for (i, v) in a.args.iter().enumerate() {
                    if i > 0 {
                        out.write_char(',')?;
                    }
                    out.write_str(v.name())?;
                }
                out.write_char(')')?;
            }
            Ok(())
        }
        FormulaKind::Bot => out.write_str("bot"),
        FormulaKind::Top => out.write_str("top"),
        FormulaKind::Neg(a) => {
            out.write_char('~')?;
            write_node(out, a, tail)
        }
        FormulaKind::Box(a) => {
            out.write_str("box ")?;
            write_node(out, a, tail)
        }
        FormulaKind::Dia(a) => {
            out.write_str("dia ")?;
            write_node(out, a, tail)
        }
        FormulaKind::And(a, b) => binary(out, a, " & ", b),
        FormulaKind::Or(a, b) => binary(out, a, " | ", b),
        FormulaKind::Imp(a, b) => binary(out, a, " -> ", b),
        FormulaKind::Forall(v, body) | FormulaKind::Exists(v, body) => {
            let word = if matches!(f.kind(), FormulaKind::Forall(..)) {
                "forall"
            } else {
                "exists"
            };
            if !tail {
                out.write_char('(')?;
            }
            write!(out, "{word} {v}. ")?;
            write_node(out, body, true)?;
            if !tail {
                out.write_char(')')?;
            }
            Ok(())
        }
    }
}

fn binary(out: &mut impl Write, a: &Formula, op: &str, b: &Formula) -> fmt::Result {
    out.write_char('(')?;
    write_node(out, a, false)?;
    out.write_str(op)?;
    write_node(out, b, true)?;
    out.write_char(')')
}
