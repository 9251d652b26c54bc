//! Formula syntax: AST, parsing, printing, lengths and subformula closure.
//!
//! Negation is not a constructor; `~F` is sugar for `F -> _|_` on input and
//! the printer folds `F -> _|_` back into `~F`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Propositional formulas over variables, bottom, and the connectives
/// `&`, `|`, `->` and the knowledge modality `K`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Var(Arc<str>),
    Bottom,
    Know(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
}

/// Output syntax selector for [`Formula::render`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Syntax {
    Ascii,
    Unicode,
    Latex,
}

impl Formula {
    pub fn var(name: &str) -> Formula {
        Formula::Var(name.into())
    }

    pub fn bottom() -> Formula {
        Formula::Bottom
    }

    pub fn know(body: Formula) -> Formula {
        Formula::Know(Arc::new(body))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Arc::new(l), Arc::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Arc::new(l), Arc::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Arc::new(l), Arc::new(r))
    }

    /// `~F`, i.e. `F -> _|_`.
    pub fn neg(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Var(_) | Formula::Bottom)
    }

    pub fn is_know(&self) -> bool {
        matches!(self, Formula::Know(_))
    }

    /// Symbol count: every variable, bottom, connective and `K` counts one.
    pub fn length(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bottom => 1,
            Formula::Know(b) => 1 + b.length(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                1 + l.length() + r.length()
            }
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Bottom => vec![],
            Formula::Know(b) => vec![b],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => vec![l, r],
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Formula::Var(_) => 0,
            Formula::Bottom => 1,
            Formula::Know(_) => 2,
            Formula::And(..) => 3,
            Formula::Or(..) => 4,
            Formula::Implies(..) => 5,
        }
    }

    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        Parser::new(text).parse_formula_eof()
    }

    pub fn render(&self, syntax: Syntax) -> String {
        let mut out = String::new();
        render_into(self, syntax, 0, &mut out);
        out
    }
}

/// Canonical total order: by length, then constructor tag
/// (Var < Bottom < K < And < Or < Implies), then children and names.
impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length()
            .cmp(&other.length())
            .then_with(|| self.tag().cmp(&other.tag()))
            .then_with(|| match (self, other) {
                (Formula::Var(a), Formula::Var(b)) => a.cmp(b),
                (Formula::Bottom, Formula::Bottom) => Ordering::Equal,
                (Formula::Know(a), Formula::Know(b)) => a.cmp(b),
                (Formula::And(a, b), Formula::And(c, d))
                | (Formula::Or(a, b), Formula::Or(c, d))
                | (Formula::Implies(a, b), Formula::Implies(c, d)) => {
                    a.cmp(c).then_with(|| b.cmp(d))
                }
                _ => unreachable!("tags equal"),
            })
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Syntax::Ascii))
    }
}

/// A duplicate-free set of formulas iterated in the canonical order.
pub type FormulaSet = BTreeSet<Formula>;

/// All subformulas of the members of `antecedent` and of `goal`, extended
/// by `K_|_` and `_|_`. The result is subformula-closed.
pub fn subformula_closure<'a, I>(antecedent: I, goal: &Formula) -> FormulaSet
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut out = FormulaSet::new();
    for f in antecedent {
        collect_subformulas(f, &mut out);
    }
    collect_subformulas(goal, &mut out);
    collect_subformulas(&Formula::know(Formula::Bottom), &mut out);
    out
}

fn collect_subformulas(f: &Formula, out: &mut FormulaSet) {
    if out.contains(f) {
        return;
    }
    out.insert(f.clone());
    for c in f.children() {
        collect_subformulas(c, out);
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence: -> is 1 (right assoc), | is 2, & is 3, prefix K/~ is 4.
fn render_into(f: &Formula, syn: Syntax, min_prec: u8, out: &mut String) {
    match f {
        Formula::Var(name) => out.push_str(name),
        Formula::Bottom => out.push_str(match syn {
            Syntax::Ascii => "_|_",
            Syntax::Unicode => "\u{22a5}",
            Syntax::Latex => "\\bot ",
        }),
        Formula::Implies(l, r) if **r == Formula::Bottom => {
            // print F -> _|_ as ~F
            paren(4 < min_prec, out, syn, |out| {
                out.push_str(match syn {
                    Syntax::Ascii => "~",
                    Syntax::Unicode => "\u{ac}",
                    Syntax::Latex => "\\neg ",
                });
                render_into(l, syn, 4, out);
            });
        }
        Formula::Know(b) => paren(4 < min_prec, out, syn, |out| {
            out.push('K');
            if syn == Syntax::Latex {
                out.push(' ');
            }
            render_into(b, syn, 4, out);
        }),
        Formula::And(l, r) => paren(3 < min_prec, out, syn, |out| {
            render_into(l, syn, 3, out);
            out.push_str(match syn {
                Syntax::Ascii => " & ",
                Syntax::Unicode => " \u{2227} ",
                Syntax::Latex => " \\wedge ",
            });
            render_into(r, syn, 4, out);
        }),
        Formula::Or(l, r) => paren(2 < min_prec, out, syn, |out| {
            render_into(l, syn, 2, out);
            out.push_str(match syn {
                Syntax::Ascii => " | ",
                Syntax::Unicode => " \u{2228} ",
                Syntax::Latex => " \\vee ",
            });
            render_into(r, syn, 3, out);
        }),
        Formula::Implies(l, r) => paren(1 < min_prec, out, syn, |out| {
            render_into(l, syn, 2, out);
            out.push_str(match syn {
                Syntax::Ascii => " -> ",
                Syntax::Unicode => " \u{2192} ",
                Syntax::Latex => " \\to ",
            });
            render_into(r, syn, 1, out);
        }),
    }
}

fn paren(needed: bool, out: &mut String, syn: Syntax, body: impl FnOnce(&mut String)) {
    let _ = syn;
    if needed {
        out.push('(');
    }
    body(out);
    if needed {
        out.push(')');
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

pub(crate) struct Parser<'a> {
    text: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize, // index into chars
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str) -> Parser<'a> {
        Parser {
            text,
            chars: text.char_indices().collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let position = self
            .chars
            .get(self.pos)
            .map(|&(i, _)| i)
            .unwrap_or(self.text.len());
        Err(ParseError {
            position,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        self.eat(s)
    }

    pub(crate) fn parse_err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        self.err(message)
    }

    fn eat(&mut self, s: &str) -> bool {
        let save = self.pos;
        for expected in s.chars() {
            if self.bump() != Some(expected) {
                self.pos = save;
                return false;
            }
        }
        true
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn parse_formula_eof(&mut self) -> Result<Formula, ParseError> {
        let f = self.parse_implies()?;
        if !self.at_end() {
            return self.err("unexpected trailing input");
        }
        Ok(f)
    }

    pub(crate) fn parse_implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.parse_or()?;
        self.skip_ws();
        if self.eat("->") || self.eat("\u{2192}") {
            let rhs = self.parse_implies()?; // right associative
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_and()?;
        loop {
            self.skip_ws();
            // `|` but not `|-` (sequent turnstile)
            let save = self.pos;
            if self.eat("|-") {
                self.pos = save;
                return Ok(lhs);
            }
            if self.eat("|") || self.eat("\u{2228}") {
                let rhs = self.parse_and()?;
                lhs = Formula::or(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            self.skip_ws();
            if self.eat("&") || self.eat("\u{2227}") {
                let rhs = self.parse_prefix()?;
                lhs = Formula::and(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_prefix(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('K') => {
                self.pos += 1;
                Ok(Formula::know(self.parse_prefix()?))
            }
            Some('~') | Some('\u{ac}') => {
                self.pos += 1;
                Ok(Formula::neg(self.parse_prefix()?))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.eat("_|_") || self.eat("\u{22a5}") {
            return Ok(Formula::Bottom);
        }
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let f = self.parse_implies()?;
                self.skip_ws();
                if !self.eat(")") {
                    return self.err("expected ')'");
                }
                Ok(f)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    // 'K' always reads as the modality, so identifiers stop there
                    if (c.is_ascii_alphanumeric() || c == '_') && c != 'K' {
                        name.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return self.err("expected a formula");
                }
                if name == "false" {
                    return Ok(Formula::Bottom);
                }
                Ok(Formula::Var(name.as_str().into()))
            }
            _ => self.err("expected a formula"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }

    #[test]
    fn parse_distribution_axiom() {
        let f = Formula::parse("K(p->q)->(Kp->Kq)").unwrap();
        let expected = Formula::implies(
            Formula::know(Formula::implies(p(), q())),
            Formula::implies(Formula::know(p()), Formula::know(q())),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parse_consistency_axiom() {
        let f = Formula::parse("~K_|_").unwrap();
        assert_eq!(
            f,
            Formula::implies(Formula::know(Formula::Bottom), Formula::Bottom)
        );
    }

    #[test]
    fn parse_single_variable() {
        assert_eq!(Formula::parse("p").unwrap(), p());
    }

    #[test]
    fn parse_unicode_aliases() {
        assert_eq!(
            Formula::parse("\u{ac}K\u{22a5}").unwrap(),
            Formula::parse("~K_|_").unwrap()
        );
        assert_eq!(
            Formula::parse("p \u{2227} q \u{2192} p \u{2228} q").unwrap(),
            Formula::parse("p & q -> p | q").unwrap()
        );
    }

    #[test]
    fn parse_false_alias() {
        assert_eq!(Formula::parse("false").unwrap(), Formula::Bottom);
    }

    #[test]
    fn parse_errors_report_position() {
        let err = Formula::parse("p & ").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(Formula::parse("p q").is_err());
        assert!(Formula::parse("(p").is_err());
        assert!(Formula::parse("").is_err());
    }

    #[test]
    fn render_negated_k_bottom() {
        let f = Formula::implies(Formula::know(Formula::Bottom), Formula::Bottom);
        assert_eq!(f.render(Syntax::Ascii), "~K_|_");
    }

    #[test]
    fn render_nested_know_unicode() {
        let f = Formula::know(Formula::know(Formula::var("g")));
        assert_eq!(f.render(Syntax::Unicode), "KKg");
    }

    #[test]
    fn render_precedence_parens() {
        let f = Formula::and(p(), Formula::or(q(), Formula::var("r")));
        assert_eq!(f.render(Syntax::Ascii), "p & (q | r)");
    }

    #[test]
    fn render_implication_associativity() {
        let f = Formula::implies(Formula::implies(p(), q()), p());
        assert_eq!(f.render(Syntax::Ascii), "(p -> q) -> p");
        let g = Formula::implies(p(), Formula::implies(q(), p()));
        assert_eq!(g.render(Syntax::Ascii), "p -> q -> p");
        assert_eq!(Formula::parse("p -> q -> p").unwrap(), g);
    }

    #[test]
    fn length_counts_symbols() {
        assert_eq!(p().length(), 1);
        assert_eq!(Formula::know(p()).length(), 2);
        assert_eq!(Formula::implies(Formula::know(p()), p()).length(), 4);
    }

    #[test]
    fn closure_of_know_p() {
        let s = subformula_closure([].iter(), &Formula::know(p()));
        let expected: FormulaSet = [
            Formula::know(p()),
            p(),
            Formula::know(Formula::Bottom),
            Formula::Bottom,
        ]
        .into_iter()
        .collect();
        assert_eq!(s, expected);
    }

    #[test]
    fn closure_of_bottom() {
        let s = subformula_closure([].iter(), &Formula::Bottom);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&Formula::Bottom));
        assert!(s.contains(&Formula::know(Formula::Bottom)));
    }

    #[test]
    fn closure_with_antecedent() {
        let ante = [Formula::know(Formula::and(p(), q()))];
        let s = subformula_closure(ante.iter(), &q());
        let expected: FormulaSet = [
            Formula::know(Formula::and(p(), q())),
            Formula::and(p(), q()),
            p(),
            q(),
            Formula::know(Formula::Bottom),
            Formula::Bottom,
        ]
        .into_iter()
        .collect();
        assert_eq!(s, expected);
    }

    #[test]
    fn canonical_order_by_length_then_tag() {
        let mut v = vec![
            Formula::implies(p(), q()),
            Formula::Bottom,
            Formula::know(p()),
            p(),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                p(),
                Formula::Bottom,
                Formula::know(p()),
                Formula::implies(p(), q()),
            ]
        );
    }
}
