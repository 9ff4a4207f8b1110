//! The six arithmetic expression templates: instantiation, canonical
//! rendering, parsing, exact evaluation, and sub-expression annotation.
//!
//! Rendering is the single source of truth for character positions. The
//! canonical form is `"Evaluate "` followed by the expression body, with a
//! single space on each side of every `+`, no spaces around `*` or `/`, and
//! parentheses exactly where the template shapes put them (around any
//! compound operand of a division). Operands are single digits, so every
//! rendering of a given template has the same length and every slot and
//! operator sits at a template-fixed character position.
//!
//! All arithmetic is exact rational arithmetic; division never rounds.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Prefix of every rendered question.
pub const QUESTION_PREFIX: &str = "Evaluate ";

/// Binary operator appearing in the templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Add,
    Mul,
    Div,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    /// Rendered form; `+` carries one space on each side.
    fn rendered(self) -> &'static str {
        match self {
            Op::Add => " + ",
            Op::Mul => "*",
            Op::Div => "/",
        }
    }

    pub fn apply(self, l: Rational64, r: Rational64) -> Result<Rational64, ExprError> {
        match self {
            Op::Add => Ok(l + r),
            Op::Mul => Ok(l * r),
            Op::Div => {
                if r == Rational64::from_integer(0) {
                    Err(ExprError::DivisionByZero)
                } else {
                    Ok(l / r)
                }
            }
        }
    }
}

/// Half-open character range `[lo, hi)` in a rendered question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct CharSpan {
    pub lo: usize,
    pub hi: usize,
}

impl CharSpan {
    pub fn new(lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi);
        CharSpan { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, other: &CharSpan) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_pos(&self, pos: usize) -> bool {
        self.lo <= pos && pos < self.hi
    }

    /// The spanned substring.
    pub fn slice<'a>(&self, s: &'a str) -> &'a str {
        &s[self.lo..self.hi]
    }
}

impl From<(usize, usize)> for CharSpan {
    fn from((lo, hi): (usize, usize)) -> Self {
        CharSpan { lo, hi }
    }
}

impl From<CharSpan> for (usize, usize) {
    fn from(s: CharSpan) -> Self {
        (s.lo, s.hi)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("template expects {expected} operands, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("operand {0} outside digit range 0..=9")]
    OperandOutOfRange(u8),
    #[error("division by zero")]
    DivisionByZero,
    #[error("sub-expression value {0} is not an integer")]
    NonIntegerValue(Rational64),
    #[error("question text is not the rendering of this expression")]
    QuestionMismatch,
}

/// Parse failure with a 1-based character offset, as in compiler columns.
#[derive(Debug, Error, PartialEq)]
#[error("parse error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("unexpected character {found:?}, expected {expected}")]
    UnexpectedChar { found: char, expected: &'static str },
    #[error("expression does not match any of the six templates")]
    NoTemplateMatch,
    #[error("input is not in canonical rendering")]
    NonCanonical,
}

/// Abstract template shape with operand slot indices at the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Slot(usize),
    Bin(Op, Box<Shape>, Box<Shape>),
}

impl Shape {
    fn is_binary(&self) -> bool {
        matches!(self, Shape::Bin(..))
    }
}

fn slot(i: usize) -> Shape {
    Shape::Slot(i)
}

fn bin(op: Op, l: Shape, r: Shape) -> Shape {
    Shape::Bin(op, Box::new(l), Box::new(r))
}

/// Fixed positional facts about one operator of a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorSite {
    /// 1-based ordinal in evaluation (post) order; the last ordinal is the
    /// root operator, whose value is the final answer.
    pub op_index: usize,
    pub op: Op,
    /// Character position of the operator symbol in the question.
    pub op_char: usize,
    /// Constituent span (the operator's full sub-expression, parentheses
    /// included where the template has them).
    pub constituent: CharSpan,
}

/// One of the six expression templates.
#[derive(Debug, Clone)]
pub struct Template {
    id: u8,
    shape: Shape,
    question_len: usize,
    slot_positions: Vec<usize>,
    operators: Vec<OperatorSite>,
}

impl Template {
    /// The six templates, in paper order (ids 1..=6).
    pub fn all() -> &'static [Template; 6] {
        static TEMPLATES: OnceLock<[Template; 6]> = OnceLock::new();
        TEMPLATES.get_or_init(|| {
            let shapes = [
                // 1) (x1 + x2)/x3
                bin(Op::Div, bin(Op::Add, slot(0), slot(1)), slot(2)),
                // 2) (x1*x2)/(x3*x4)
                bin(
                    Op::Div,
                    bin(Op::Mul, slot(0), slot(1)),
                    bin(Op::Mul, slot(2), slot(3)),
                ),
                // 3) x1 + x2*x3
                bin(Op::Add, slot(0), bin(Op::Mul, slot(1), slot(2))),
                // 4) (x1 + x2*x3)/x4
                bin(
                    Op::Div,
                    bin(Op::Add, slot(0), bin(Op::Mul, slot(1), slot(2))),
                    slot(3),
                ),
                // 5) (x1 + x2)/x3 + x4
                bin(
                    Op::Add,
                    bin(Op::Div, bin(Op::Add, slot(0), slot(1)), slot(2)),
                    slot(3),
                ),
                // 6) (x1 + x2)/x3 + (x4 + x5)/x6
                bin(
                    Op::Add,
                    bin(Op::Div, bin(Op::Add, slot(0), slot(1)), slot(2)),
                    bin(Op::Div, bin(Op::Add, slot(3), slot(4)), slot(5)),
                ),
            ];
            let mut out: Vec<Template> = Vec::with_capacity(6);
            for (i, shape) in shapes.into_iter().enumerate() {
                out.push(Template::build(i as u8 + 1, shape));
            }
            out.try_into().unwrap()
        })
    }

    /// Look up a template by its 1-based id.
    pub fn get(id: u8) -> Option<&'static Template> {
        if (1..=6).contains(&id) {
            Some(&Template::all()[id as usize - 1])
        } else {
            None
        }
    }

    fn build(id: u8, shape: Shape) -> Template {
        // Positions do not depend on operand values, so derive them from an
        // all-ones reference instantiation (valid for every template).
        let arity = count_slots(&shape);
        let mut t = Template {
            id,
            shape,
            question_len: 0,
            slot_positions: vec![0; arity],
            operators: Vec::new(),
        };
        let reference = t.instantiate(&vec![1; arity]).expect("all-ones reference");
        t.question_len = reference.span.hi;
        collect_slot_positions(&t.shape, &reference, &mut t.slot_positions);
        let mut sites = Vec::new();
        collect_operators(&reference, &mut sites);
        t.operators = sites;
        t
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn arity(&self) -> usize {
        self.slot_positions.len()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Length of every question rendered from this template.
    pub fn question_len(&self) -> usize {
        self.question_len
    }

    /// Character position of each operand slot x_1..x_n in the question.
    pub fn slot_positions(&self) -> &[usize] {
        &self.slot_positions
    }

    /// Operators in evaluation (post) order.
    pub fn operators(&self) -> &[OperatorSite] {
        &self.operators
    }

    /// Build the fully valued expression tree for one operand assignment.
    ///
    /// Spans refer to the canonical rendering (including the question
    /// prefix). Fails on arity mismatch, non-digit operands, and division
    /// by zero; the caller is expected to resample on the latter.
    pub fn instantiate(&self, operands: &[u8]) -> Result<ExprNode, ExprError> {
        let arity = count_slots(&self.shape);
        if operands.len() != arity {
            return Err(ExprError::ArityMismatch {
                expected: arity,
                got: operands.len(),
            });
        }
        if let Some(&bad) = operands.iter().find(|&&d| d > 9) {
            return Err(ExprError::OperandOutOfRange(bad));
        }
        build_node(&self.shape, operands, QUESTION_PREFIX.len(), false)
    }

    /// Canonical question text for one operand assignment, no value checks
    /// beyond arity and digit range (division by zero still renders).
    pub fn render_operands(&self, operands: &[u8]) -> Result<String, ExprError> {
        let arity = count_slots(&self.shape);
        if operands.len() != arity {
            return Err(ExprError::ArityMismatch {
                expected: arity,
                got: operands.len(),
            });
        }
        if let Some(&bad) = operands.iter().find(|&&d| d > 9) {
            return Err(ExprError::OperandOutOfRange(bad));
        }
        let mut s = String::from(QUESTION_PREFIX);
        render_shape(&self.shape, operands, false, &mut s);
        Ok(s)
    }
}

fn count_slots(shape: &Shape) -> usize {
    match shape {
        Shape::Slot(_) => 1,
        Shape::Bin(_, l, r) => count_slots(l) + count_slots(r),
    }
}

fn render_shape(shape: &Shape, operands: &[u8], wrap: bool, out: &mut String) {
    match shape {
        Shape::Slot(i) => out.push((b'0' + operands[*i]) as char),
        Shape::Bin(op, l, r) => {
            if wrap {
                out.push('(');
            }
            render_shape(l, operands, *op == Op::Div && l.is_binary(), out);
            out.push_str(op.rendered());
            render_shape(r, operands, *op == Op::Div && r.is_binary(), out);
            if wrap {
                out.push(')');
            }
        }
    }
}

/// A fully valued expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprNode {
    pub kind: ExprKind,
    /// Extent of this sub-expression in the rendered question, enclosing
    /// parentheses included when the rendering has them.
    pub span: CharSpan,
    /// Exact value of the subtree.
    pub value: Rational64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Leaf {
        digit: u8,
    },
    Binary {
        op: Op,
        /// Character position of the operator symbol.
        op_char: usize,
        /// Whether the rendering wraps this node in parentheses.
        wrapped: bool,
        left: Box<ExprNode>,
        right: Box<ExprNode>,
    },
}

impl ExprNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, ExprKind::Leaf { .. })
    }
}

fn build_node(
    shape: &Shape,
    operands: &[u8],
    start: usize,
    wrap: bool,
) -> Result<ExprNode, ExprError> {
    match shape {
        Shape::Slot(i) => Ok(ExprNode {
            kind: ExprKind::Leaf {
                digit: operands[*i],
            },
            span: CharSpan::new(start, start + 1),
            value: Rational64::from_integer(operands[*i] as i64),
        }),
        Shape::Bin(op, l, r) => {
            let mut pos = start;
            if wrap {
                pos += 1;
            }
            let left = build_node(l, operands, pos, *op == Op::Div && l.is_binary())?;
            pos = left.span.hi;
            // " + " puts the symbol one past the left child; * and / abut it.
            let op_char = if *op == Op::Add { pos + 1 } else { pos };
            pos += op.rendered().len();
            let right = build_node(r, operands, pos, *op == Op::Div && r.is_binary())?;
            pos = right.span.hi;
            if wrap {
                pos += 1;
            }
            let value = op.apply(left.value, right.value)?;
            Ok(ExprNode {
                kind: ExprKind::Binary {
                    op: *op,
                    op_char,
                    wrapped: wrap,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span: CharSpan::new(start, pos),
                value,
            })
        }
    }
}

/// Canonical question text of a valued tree (prefix included).
pub fn render(expr: &ExprNode) -> String {
    let mut s = String::from(QUESTION_PREFIX);
    render_node(expr, &mut s);
    s
}

fn render_node(expr: &ExprNode, out: &mut String) {
    match &expr.kind {
        ExprKind::Leaf { digit } => out.push((b'0' + digit) as char),
        ExprKind::Binary {
            op,
            wrapped,
            left,
            right,
            ..
        } => {
            if *wrapped {
                out.push('(');
            }
            render_node(left, out);
            out.push_str(op.rendered());
            render_node(right, out);
            if *wrapped {
                out.push(')');
            }
        }
    }
}

/// Recompute the exact value of a tree bottom-up.
pub fn evaluate(expr: &ExprNode) -> Result<Rational64, ExprError> {
    match &expr.kind {
        ExprKind::Leaf { digit } => Ok(Rational64::from_integer(*digit as i64)),
        ExprKind::Binary {
            op, left, right, ..
        } => {
            let l = evaluate(left)?;
            let r = evaluate(right)?;
            op.apply(l, r)
        }
    }
}

/// One annotated operator: its symbol position, constituent extent and
/// intermediate result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubExprAnnotation {
    /// 1-based ordinal in evaluation (post) order.
    pub op_index: usize,
    /// Character position of the operator in the question.
    pub op_char: usize,
    /// Integer intermediate result of the constituent.
    pub value: i64,
    /// Constituent span, `[lo, hi)`.
    pub span: CharSpan,
}

/// Annotate every operator of `expr` in evaluation order.
///
/// The final annotation is the root operator, so its value equals the
/// problem's answer. Fails if `question` is not the rendering of `expr` or
/// if any intermediate value is non-integral.
pub fn annotate(expr: &ExprNode, question: &str) -> Result<Vec<SubExprAnnotation>, ExprError> {
    if render(expr) != question {
        return Err(ExprError::QuestionMismatch);
    }
    let mut out = Vec::new();
    annotate_node(expr, &mut out)?;
    Ok(out)
}

fn annotate_node(expr: &ExprNode, out: &mut Vec<SubExprAnnotation>) -> Result<(), ExprError> {
    if let ExprKind::Binary {
        op_char,
        left,
        right,
        ..
    } = &expr.kind
    {
        annotate_node(left, out)?;
        annotate_node(right, out)?;
        if !expr.value.is_integer() {
            return Err(ExprError::NonIntegerValue(expr.value));
        }
        out.push(SubExprAnnotation {
            op_index: out.len() + 1,
            op_char: *op_char,
            value: expr.value.to_integer(),
            span: expr.span,
        });
    }
    Ok(())
}

/// Whether the tree is a valid problem body: every division lands on an
/// integer (hence every sub-expression value is a nonnegative integer).
pub fn all_divisions_exact(expr: &ExprNode) -> bool {
    match &expr.kind {
        ExprKind::Leaf { .. } => true,
        ExprKind::Binary {
            op, left, right, ..
        } => {
            all_divisions_exact(left)
                && all_divisions_exact(right)
                && (*op != Op::Div || expr.value.is_integer())
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parsed but not yet template-matched tree.
#[derive(Debug)]
enum PNode {
    Digit(u8),
    Bin(Op, Box<PNode>, Box<PNode>),
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.bytes[self.pos..].starts_with(s.as_bytes())
    }

    fn err_here(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(b) => ParseError {
                offset: self.pos + 1,
                kind: ParseErrorKind::UnexpectedChar {
                    found: b as char,
                    expected,
                },
            },
            None => ParseError {
                offset: self.bytes.len() + 1,
                kind: ParseErrorKind::UnexpectedEnd(expected),
            },
        }
    }

    fn expect(&mut self, ch: u8, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(expected))
        }
    }
}

/// Parse a canonical question back to its template and operand vector.
///
/// `parse(render(t, ops)) == (t, ops)` for every valid instantiation; any
/// other input fails with a 1-based offset. Inputs that are syntactically
/// well-formed but not byte-identical to a canonical rendering (extra
/// parentheses, wrong spacing) are rejected as non-canonical.
pub fn parse(question: &str) -> Result<(&'static Template, Vec<u8>), ParseError> {
    let mut c = Cursor {
        bytes: question.as_bytes(),
        pos: 0,
    };
    for &b in QUESTION_PREFIX.as_bytes() {
        c.expect(b, "question prefix \"Evaluate \"")?;
    }
    let tree = p_sum(&mut c)?;
    if c.pos != c.bytes.len() {
        return Err(c.err_here("end of input"));
    }
    let (template, operands) = match_template(&tree).ok_or(ParseError {
        offset: QUESTION_PREFIX.len() + 1,
        kind: ParseErrorKind::NoTemplateMatch,
    })?;
    // Canonical-form check: reject inputs the grammar accepts but the
    // renderer would never produce.
    let canonical = template
        .render_operands(&operands)
        .expect("matched operands render");
    if canonical != question {
        let first_diff = canonical
            .bytes()
            .zip(question.bytes())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| canonical.len().min(question.len()));
        return Err(ParseError {
            offset: first_diff + 1,
            kind: ParseErrorKind::NonCanonical,
        });
    }
    Ok((template, operands))
}

/// sum := product (" + " product)*
fn p_sum(c: &mut Cursor) -> Result<PNode, ParseError> {
    let mut node = p_product(c)?;
    while c.starts_with(" + ") {
        c.pos += 3;
        let rhs = p_product(c)?;
        node = PNode::Bin(Op::Add, Box::new(node), Box::new(rhs));
    }
    Ok(node)
}

/// product := atom (('*' | '/') atom)*
fn p_product(c: &mut Cursor) -> Result<PNode, ParseError> {
    let mut node = p_atom(c)?;
    loop {
        let op = match c.peek() {
            Some(b'*') => Op::Mul,
            Some(b'/') => Op::Div,
            _ => break,
        };
        c.pos += 1;
        let rhs = p_atom(c)?;
        node = PNode::Bin(op, Box::new(node), Box::new(rhs));
    }
    Ok(node)
}

/// atom := digit | '(' sum ')'
fn p_atom(c: &mut Cursor) -> Result<PNode, ParseError> {
    match c.peek() {
        Some(b) if b.is_ascii_digit() => {
            c.pos += 1;
            Ok(PNode::Digit(b - b'0'))
        }
        Some(b'(') => {
            c.pos += 1;
            let inner = p_sum(c)?;
            c.expect(b')', "')'")?;
            Ok(inner)
        }
        _ => Err(c.err_here("digit or '('")),
    }
}

fn match_template(tree: &PNode) -> Option<(&'static Template, Vec<u8>)> {
    for template in Template::all() {
        let mut operands = Vec::with_capacity(template.arity());
        if shape_matches(template.shape(), tree, &mut operands) {
            return Some((template, operands));
        }
        // operands filled partially on mismatch; rebuilt next iteration.
    }
    None
}

fn shape_matches(shape: &Shape, tree: &PNode, operands: &mut Vec<u8>) -> bool {
    match (shape, tree) {
        (Shape::Slot(_), PNode::Digit(d)) => {
            operands.push(*d);
            true
        }
        (Shape::Bin(sop, sl, sr), PNode::Bin(top, tl, tr)) if sop == top => {
            shape_matches(sl, tl, operands) && shape_matches(sr, tr, operands)
        }
        _ => false,
    }
}

fn collect_slot_positions(shape: &Shape, node: &ExprNode, out: &mut [usize]) {
    match (shape, &node.kind) {
        (Shape::Slot(i), ExprKind::Leaf { .. }) => out[*i] = node.span.lo,
        (Shape::Bin(_, sl, sr), ExprKind::Binary { left, right, .. }) => {
            collect_slot_positions(sl, left, out);
            collect_slot_positions(sr, right, out);
        }
        _ => unreachable!("shape and instantiated tree always align"),
    }
}

fn collect_operators(node: &ExprNode, out: &mut Vec<OperatorSite>) {
    if let ExprKind::Binary {
        op,
        op_char,
        left,
        right,
        ..
    } = &node.kind
    {
        collect_operators(left, out);
        collect_operators(right, out);
        out.push(OperatorSite {
            op_index: out.len() + 1,
            op: *op,
            op_char: *op_char,
            constituent: node.span,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instantiate(id: u8, ops: &[u8]) -> ExprNode {
        Template::get(id).unwrap().instantiate(ops).unwrap()
    }

    #[test]
    fn template_shapes_and_arities() {
        let arities = [3, 4, 3, 4, 4, 6];
        for (i, t) in Template::all().iter().enumerate() {
            assert_eq!(t.id(), i as u8 + 1);
            assert_eq!(t.arity(), arities[i]);
        }
    }

    #[test]
    fn canonical_renderings() {
        let cases: [(u8, &[u8], &str); 6] = [
            (1, &[1, 2, 3], "Evaluate (1 + 2)/3"),
            (2, &[2, 3, 1, 2], "Evaluate (2*3)/(1*2)"),
            (3, &[4, 5, 2], "Evaluate 4 + 5*2"),
            (4, &[2, 2, 3, 4], "Evaluate (2 + 2*3)/4"),
            (5, &[1, 2, 3, 4], "Evaluate (1 + 2)/3 + 4"),
            (6, &[1, 2, 3, 4, 5, 9], "Evaluate (1 + 2)/3 + (4 + 5)/9"),
        ];
        for (id, ops, want) in cases {
            let t = Template::get(id).unwrap();
            assert_eq!(t.render_operands(ops).unwrap(), want);
            let e = t.instantiate(ops).unwrap();
            assert_eq!(render(&e), want);
            assert_eq!(e.span.hi, want.len());
            assert_eq!(t.question_len(), want.len());
        }
    }

    #[test]
    fn instantiate_values() {
        assert_eq!(instantiate(1, &[1, 2, 3]).value, 1.into());
        // Precedence: 4 + (5*2), not (4+5)*2.
        assert_eq!(instantiate(3, &[4, 5, 2]).value, 14.into());
        assert_eq!(instantiate(6, &[1, 2, 3, 4, 5, 9]).value, 2.into());
    }

    #[test]
    fn instantiate_rejects_bad_input() {
        let t = Template::get(1).unwrap();
        assert_eq!(
            t.instantiate(&[1, 2]),
            Err(ExprError::ArityMismatch {
                expected: 3,
                got: 2
            })
        );
        assert_eq!(
            t.instantiate(&[1, 2, 0]),
            Err(ExprError::DivisionByZero)
        );
        assert_eq!(
            t.instantiate(&[10, 2, 3]),
            Err(ExprError::OperandOutOfRange(10))
        );
    }

    #[test]
    fn evaluate_hand_built_trees() {
        // 4*5 + 2*3 = 26; build directly, this is not a template instance.
        let leaf = |d: u8, at: usize| ExprNode {
            kind: ExprKind::Leaf { digit: d },
            span: CharSpan::new(at, at + 1),
            value: Rational64::from_integer(d as i64),
        };
        let bin_node = |op: Op, l: ExprNode, r: ExprNode| {
            let value = op.apply(l.value, r.value).unwrap();
            ExprNode {
                kind: ExprKind::Binary {
                    op,
                    op_char: l.span.hi,
                    wrapped: false,
                    left: Box::new(l),
                    right: Box::new(r),
                },
                span: CharSpan::new(0, 0),
                value,
            }
        };
        let e = bin_node(
            Op::Add,
            bin_node(Op::Mul, leaf(4, 0), leaf(5, 2)),
            bin_node(Op::Mul, leaf(2, 6), leaf(3, 8)),
        );
        assert_eq!(evaluate(&e).unwrap(), 26.into());

        // (12/3 + 10/2)/3 = 3, two-digit leaves allowed in hand-built trees.
        let wide = |v: u8| ExprNode {
            kind: ExprKind::Leaf { digit: v },
            span: CharSpan::new(0, 1),
            value: Rational64::from_integer(v as i64),
        };
        let e = bin_node(
            Op::Div,
            bin_node(
                Op::Add,
                bin_node(Op::Div, wide(12), wide(3)),
                bin_node(Op::Div, wide(10), wide(2)),
            ),
            wide(3),
        );
        assert_eq!(evaluate(&e).unwrap(), 3.into());

        assert_eq!(evaluate(&instantiate(2, &[2, 3, 1, 2])).unwrap(), 3.into());
    }

    #[test]
    fn parse_round_trips() {
        let (t, ops) = parse("Evaluate (1 + 2)/3").unwrap();
        assert_eq!((t.id(), ops), (1, vec![1, 2, 3]));
        let (t, ops) = parse("Evaluate (2*3)/(1*2)").unwrap();
        assert_eq!((t.id(), ops), (2, vec![2, 3, 1, 2]));
    }

    #[test]
    fn parse_error_offsets() {
        // Unbalanced parenthesis: failure at 1-based offset 18 (end of input).
        let err = parse("Evaluate (1 + 2/3").unwrap_err();
        assert_eq!(err.offset, 18);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd(_)));

        let err = parse("Compute (1 + 2)/3").unwrap_err();
        assert_eq!(err.offset, 1);

        // Well-formed but not canonical.
        let err = parse("Evaluate ((1 + 2))/3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonCanonical);

        // Well-formed, canonical spacing, but no template has this shape.
        let err = parse("Evaluate 1 + 2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NoTemplateMatch);
    }

    #[test]
    fn annotations_are_in_evaluation_order() {
        let e = instantiate(1, &[1, 2, 3]);
        let q = render(&e);
        let ann = annotate(&e, &q).unwrap();
        assert_eq!(ann.len(), 2);
        assert_eq!(ann[0].value, 3);
        assert_eq!(ann[0].span.slice(&q), "(1 + 2)");
        assert_eq!(ann[1].value, 1);
        assert_eq!(ann[1].span.slice(&q), "(1 + 2)/3");
        assert_eq!(q.as_bytes()[ann[0].op_char], b'+');
        assert_eq!(q.as_bytes()[ann[1].op_char], b'/');

        let e = instantiate(5, &[1, 2, 3, 4]);
        let ann = annotate(&e, &render(&e)).unwrap();
        let values: Vec<i64> = ann.iter().map(|a| a.value).collect();
        assert_eq!(values, vec![3, 1, 5]);

        // Template 4 evaluation order: '*' then '+' then '/'.
        let e = instantiate(4, &[2, 2, 3, 4]);
        let q = render(&e);
        let ann = annotate(&e, &q).unwrap();
        let ops: Vec<u8> = ann.iter().map(|a| q.as_bytes()[a.op_char]).collect();
        assert_eq!(ops, vec![b'*', b'+', b'/']);
        let values: Vec<i64> = ann.iter().map(|a| a.value).collect();
        assert_eq!(values, vec![6, 8, 2]);
    }

    #[test]
    fn annotate_checks_question() {
        let e = instantiate(1, &[1, 2, 3]);
        assert_eq!(
            annotate(&e, "Evaluate (1 + 2)/4"),
            Err(ExprError::QuestionMismatch)
        );
    }

    #[test]
    fn span_structure_invariants() {
        fn check(node: &ExprNode) {
            if let ExprKind::Binary {
                op_char,
                left,
                right,
                ..
            } = &node.kind
            {
                assert!(node.span.contains(&left.span));
                assert!(node.span.contains(&right.span));
                assert!(left.span.hi <= *op_char);
                assert!(*op_char < right.span.lo);
                check(left);
                check(right);
            }
        }
        for t in Template::all() {
            let ops: Vec<u8> = (0..t.arity()).map(|i| (i % 9 + 1) as u8).collect();
            if let Ok(e) = t.instantiate(&ops) {
                check(&e);
            }
        }
    }

    #[test]
    fn slot_positions_match_leaf_spans() {
        let t = Template::get(6).unwrap();
        let q = t.render_operands(&[1, 2, 3, 4, 5, 9]).unwrap();
        let expect: Vec<u8> = t
            .slot_positions()
            .iter()
            .map(|&p| q.as_bytes()[p])
            .collect();
        assert_eq!(expect, vec![b'1', b'2', b'3', b'4', b'5', b'9']);
    }
}
