//! Modal formulas, their concrete syntax, and the standard translation into
//! first-order logic over a binary accessibility relation.
//!
//! Grammar (ASCII):
//! ```text
//! form  := imp
//! imp   := or ("->" imp)?          right associative
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := ("~" | "[]" | "<>") unary | atom
//! atom  := ident | "false" | "(" form ")"
//! ident := [a-z][a-zA-Z0-9_]*
//! ```
//! Negation is sugar: `~A` parses to `A -> false` and implications into
//! `false` render back as `~`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A label naming a world in a labelled sequent, or a first-order variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

/// A modal formula.  `Imp(A, Bottom)` plays the role of negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Bottom,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Dia(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }
    pub fn neg(a: Formula) -> Self {
        Formula::imp(a, Formula::Bottom)
    }
    pub fn boxed(a: Formula) -> Self {
        Formula::Box(Box::new(a))
    }
    pub fn dia(a: Formula) -> Self {
        Formula::Dia(Box::new(a))
    }

    /// All subformulas, including the formula itself.
    pub fn subformula_closure(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        out.insert(self.clone());
        match self {
            Formula::Atom(_) | Formula::Bottom => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
            Formula::Box(a) | Formula::Dia(a) => a.collect_subformulas(out),
        }
    }

    /// Propositional atoms occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for sf in self.subformula_closure() {
            if let Formula::Atom(p) = sf {
                out.insert(p);
            }
        }
        out
    }

    /// Modal depth (nesting of `[]`/`<>`).
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Box(a) | Formula::Dia(a) => 1 + a.modal_depth(),
        }
    }

    /// Number of connectives (including modalities).
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Box(a) | Formula::Dia(a) => 1 + a.size(),
        }
    }

    pub fn parse(input: &str) -> Result<Formula, ParseError> {
        let mut p = Parser::new(input);
        let f = p.formula()?;
        p.expect_eof()?;
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self, 0, f)
    }
}

// Precedence levels: 1 = ->, 2 = |, 3 = &, 4 = unary.
fn render(fm: &Formula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match fm {
        Formula::Atom(p) => f.write_str(p),
        Formula::Bottom => f.write_str("false"),
        Formula::Imp(a, b) if **b == Formula::Bottom => {
            f.write_str("~")?;
            render(a, 4, f)
        }
        Formula::Imp(a, b) => {
            let parens = prec > 1;
            if parens {
                f.write_str("(")?;
            }
            render(a, 2, f)?;
            f.write_str(" -> ")?;
            render(b, 1, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Or(a, b) => {
            let parens = prec > 2;
            if parens {
                f.write_str("(")?;
            }
            render(a, 2, f)?;
            f.write_str(" | ")?;
            render(b, 3, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::And(a, b) => {
            let parens = prec > 3;
            if parens {
                f.write_str("(")?;
            }
            render(a, 3, f)?;
            f.write_str(" & ")?;
            render(b, 4, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Box(a) => {
            f.write_str("[]")?;
            render(a, 4, f)
        }
        Formula::Dia(a) => {
            f.write_str("<>")?;
            render(a, 4, f)
        }
    }
}

/// Parse failure with a byte offset into the input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { input, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len()
            && self.input.as_bytes()[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn peek_found(&self) -> String {
        let r = self.rest();
        if r.is_empty() {
            "end of input".to_owned()
        } else {
            let n = r.chars().take(8).map(char::len_utf8).sum();
            format!("{:?}", &r[..n])
        }
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.to_owned(),
            found: self.peek_found(),
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let mut it = r.char_indices();
        match it.next() {
            Some((_, c)) if c.is_ascii_lowercase() => {}
            _ => return None,
        }
        let end = r
            .char_indices()
            .skip(1)
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(r.len());
        self.pos += end;
        Some(&r[..end])
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        if self.eat("->") {
            let rhs = self.formula()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and_level()?;
        loop {
            // Do not confuse `|` with `->`'s absence; `|` is a single byte.
            self.skip_ws();
            if self.rest().starts_with('|') {
                self.pos += 1;
                let g = self.and_level()?;
                f = Formula::or(f, g);
            } else {
                return Ok(f);
            }
        }
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat("~") {
            return Ok(Formula::neg(self.unary()?));
        }
        if self.eat("[]") {
            return Ok(Formula::boxed(self.unary()?));
        }
        if self.eat("<>") {
            return Ok(Formula::dia(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        if self.eat("(") {
            let f = self.formula()?;
            if !self.eat(")") {
                return Err(self.err("`)`"));
            }
            return Ok(f);
        }
        self.skip_ws();
        match self.ident() {
            Some("false") => Ok(Formula::Bottom),
            Some(name) => Ok(Formula::Atom(name.to_owned())),
            None => Err(self.err("identifier, `false`, or `(`")),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.pos == self.input.len() {
            Ok(())
        } else {
            Err(self.err("end of input"))
        }
    }
}

/// First-order formulas in the image of the standard translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FirstOrderFormula {
    Pred(String, Label),
    RelAtom(Label, Label),
    Bottom,
    And(Box<FirstOrderFormula>, Box<FirstOrderFormula>),
    Or(Box<FirstOrderFormula>, Box<FirstOrderFormula>),
    Imp(Box<FirstOrderFormula>, Box<FirstOrderFormula>),
    Forall(Label, Box<FirstOrderFormula>),
    Exists(Label, Box<FirstOrderFormula>),
}

impl fmt::Display for FirstOrderFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FirstOrderFormula::*;
        match self {
            Pred(p, x) => write!(f, "{p}({x})"),
            RelAtom(x, y) => write!(f, "{x} R {y}"),
            Bottom => f.write_str("false"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Imp(a, b) => write!(f, "({a} -> {b})"),
            Forall(x, a) => write!(f, "forall {x}. {a}"),
            Exists(x, a) => write!(f, "exists {x}. {a}"),
        }
    }
}

/// Standard translation `ST_x(A)`: atoms become unary predicates at `x`,
/// `[]A` becomes `forall y (x R y -> ST_y A)`, `<>A` becomes
/// `exists y (x R y & ST_y A)`.  Bound labels are `y0, y1, ...`, drawn fresh
/// relative to the free label by a monotone counter per call.
pub fn standard_translation(x: &Label, a: &Formula) -> FirstOrderFormula {
    let mut counter = 0usize;
    st(x, a, &mut counter, x)
}

fn fresh_bound(counter: &mut usize, avoid: &Label) -> Label {
    loop {
        let cand = Label(format!("y{}", *counter));
        *counter += 1;
        if &cand != avoid {
            return cand;
        }
    }
}

fn st(x: &Label, a: &Formula, counter: &mut usize, avoid: &Label) -> FirstOrderFormula {
    use FirstOrderFormula as F;
    match a {
        Formula::Atom(p) => F::Pred(p.clone(), x.clone()),
        Formula::Bottom => F::Bottom,
        Formula::And(a, b) => F::And(
            Box::new(st(x, a, counter, avoid)),
            Box::new(st(x, b, counter, avoid)),
        ),
        Formula::Or(a, b) => F::Or(
            Box::new(st(x, a, counter, avoid)),
            Box::new(st(x, b, counter, avoid)),
        ),
        Formula::Imp(a, b) => F::Imp(
            Box::new(st(x, a, counter, avoid)),
            Box::new(st(x, b, counter, avoid)),
        ),
        Formula::Box(a) => {
            let y = fresh_bound(counter, avoid);
            let body = st(&y, a, counter, avoid);
            F::Forall(
                y.clone(),
                Box::new(F::Imp(
                    Box::new(F::RelAtom(x.clone(), y)),
                    Box::new(body),
                )),
            )
        }
        Formula::Dia(a) => {
            let y = fresh_bound(counter, avoid);
            let body = st(&y, a, counter, avoid);
            F::Exists(
                y.clone(),
                Box::new(F::And(
                    Box::new(F::RelAtom(x.clone(), y)),
                    Box::new(body),
                )),
            )
        }
    }
}

/// The three named axioms used throughout tests and the command line:
/// `k`, `4` (`four`) and Loeb's axiom.
pub fn axiom_k() -> Formula {
    Formula::parse("[](p -> q) -> ([]p -> []q)").unwrap()
}

pub fn axiom_four() -> Formula {
    Formula::parse("[]p -> [][]p").unwrap()
}

pub fn axiom_loeb() -> Formula {
    Formula::parse("[]([]p -> p) -> []p").unwrap()
}

/// The classically valid, intuitionistically refutable companion of Loeb's
/// axiom: `<>p -> <>(p & []~p)`.
pub fn contra_loeb() -> Formula {
    Formula::parse("<>p -> <>(p & []~p)").unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders_loeb() {
        let f = axiom_loeb();
        assert_eq!(f.to_string(), "[]([]p -> p) -> []p");
        assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn negation_desugars_and_resugars() {
        let f = Formula::parse("~p").unwrap();
        assert_eq!(f, Formula::imp(Formula::atom("p"), Formula::Bottom));
        assert_eq!(f.to_string(), "~p");
        let g = Formula::parse("p -> false").unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_string(), "~p");
    }

    #[test]
    fn precedence_and_associativity() {
        let f = Formula::parse("p -> q -> r").unwrap();
        assert_eq!(
            f,
            Formula::imp(
                Formula::atom("p"),
                Formula::imp(Formula::atom("q"), Formula::atom("r"))
            )
        );
        let g = Formula::parse("p & q | r").unwrap();
        assert_eq!(
            g,
            Formula::or(
                Formula::and(Formula::atom("p"), Formula::atom("q")),
                Formula::atom("r")
            )
        );
        let h = Formula::parse("~[]p & q").unwrap();
        assert_eq!(
            h,
            Formula::and(
                Formula::neg(Formula::boxed(Formula::atom("p"))),
                Formula::atom("q")
            )
        );
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let e = Formula::parse("p -> ").unwrap_err();
        assert_eq!(e.offset, 5);
        let e = Formula::parse("(p -> q").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(Formula::parse("P").is_err(), "atoms start lowercase");
    }

    #[test]
    fn subformula_closure_counts() {
        let f = axiom_loeb();
        // []([]p->p)->[]p, []([]p->p), []p->p, []p, p : five distinct.
        assert_eq!(f.subformula_closure().len(), 5);
    }

    #[test]
    fn standard_translation_of_box() {
        let f = Formula::parse("[]p").unwrap();
        let t = standard_translation(&Label::new("x"), &f);
        assert_eq!(t.to_string(), "forall y0. (x R y0 -> p(y0))");
    }

    #[test]
    fn standard_translation_avoids_free_label() {
        let f = Formula::parse("<>p").unwrap();
        let t = standard_translation(&Label::new("y0"), &f);
        assert_eq!(t.to_string(), "exists y1. (y0 R y1 & p(y1))");
    }

    #[test]
    fn nested_translation_uses_distinct_bound_labels() {
        let f = Formula::parse("<>[]p").unwrap();
        let t = standard_translation(&Label::new("x"), &f);
        assert_eq!(
            t.to_string(),
            "exists y0. (x R y0 & forall y1. (y0 R y1 -> p(y1)))"
        );
    }
}
