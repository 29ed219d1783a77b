//! First-order formulas over a [`Structure`]: syntax, sort checking and
//! satisfaction.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::lexer::{Cursor, Tok};
use super::structure::{RelId, SortId, Structure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// A variable or, when no variable of that name is bound, a constant symbol.
    Name(String),
    /// A literal element of the universe, written `@name`.
    Element(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, String, Box<Formula>),
    Forall(String, String, Box<Formula>),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => write!(f, "{n}"),
            Term::Element(n) => write!(f, "@{n}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, parts: &[Formula], op: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(r, args) => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{r}({})", args.join(","))
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(p) => write!(f, "~{p}"),
            Formula::And(ps) => join(f, ps, "&"),
            Formula::Or(ps) => join(f, ps, "|"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::Exists(v, s, p) => write!(f, "(exists {v}:{s}. {p})"),
            Formula::Forall(v, s, p) => write!(f, "(forall {v}:{s}. {p})"),
        }
    }
}

/// `{ x:S, y:T | φ }`: a formula with an ordered, sorted list of free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comprehension {
    pub vars: Vec<(String, String)>,
    pub body: Formula,
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut c = Cursor::new(text)?;
    let f = iff(&mut c)?;
    if !c.at_end() {
        return c.error("unexpected trailing input");
    }
    Ok(f)
}

pub fn parse_comprehension(text: &str) -> Result<Comprehension> {
    let mut c = Cursor::new(text)?;
    c.expect_sym("{")?;
    let mut vars = Vec::new();
    loop {
        let v = c.ident()?;
        c.expect_sym(":")?;
        let s = c.ident()?;
        vars.push((v, s));
        if c.eat_sym("|") {
            break;
        }
        c.expect_sym(",")?;
    }
    let body = iff(&mut c)?;
    c.expect_sym("}")?;
    if !c.at_end() {
        return c.error("unexpected trailing input");
    }
    Ok(Comprehension { vars, body })
}

fn iff(c: &mut Cursor) -> Result<Formula> {
    let mut lhs = implies(c)?;
    while c.eat_sym("<->") {
        let rhs = implies(c)?;
        lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn implies(c: &mut Cursor) -> Result<Formula> {
    let lhs = or(c)?;
    if c.eat_sym("->") {
        let rhs = implies(c)?;
        return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn or(c: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![and(c)?];
    while c.eat_sym("|") {
        parts.push(and(c)?);
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::Or(parts)
    })
}

fn and(c: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![unary(c)?];
    while c.eat_sym("&") {
        parts.push(unary(c)?);
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::And(parts)
    })
}

fn term(c: &mut Cursor) -> Result<Term> {
    if c.eat_sym("@") {
        Ok(Term::Element(c.ident()?))
    } else {
        Ok(Term::Name(c.ident()?))
    }
}

fn unary(c: &mut Cursor) -> Result<Formula> {
    if c.eat_sym("~") || c.eat_sym("!") {
        return Ok(Formula::Not(Box::new(unary(c)?)));
    }
    if c.is_word("exists") || c.is_word("forall") {
        let universal = c.is_word("forall");
        c.next();
        let mut binders = Vec::new();
        loop {
            let v = c.ident()?;
            c.expect_sym(":")?;
            let s = c.ident()?;
            binders.push((v, s));
            if !c.eat_sym(",") {
                break;
            }
        }
        if !c.eat_sym(".") && !c.is_sym("(") {
            return c.error("expected `.` after quantifier binders");
        }
        let mut body = iff(c)?;
        for (v, s) in binders.into_iter().rev() {
            body = if universal {
                Formula::Forall(v, s, Box::new(body))
            } else {
                Formula::Exists(v, s, Box::new(body))
            };
        }
        return Ok(body);
    }
    if c.eat_sym("(") {
        let f = iff(c)?;
        c.expect_sym(")")?;
        return Ok(f);
    }
    if c.is_word("true") {
        c.next();
        return Ok(Formula::True);
    }
    if c.is_word("false") {
        c.next();
        return Ok(Formula::False);
    }
    if matches!(c.peek(), Some(Tok::Ident(_))) && matches!(c.peek_at(1), Some(Tok::Sym("("))) {
        let r = c.ident()?;
        c.expect_sym("(")?;
        let mut args = Vec::new();
        if !c.eat_sym(")") {
            loop {
                args.push(term(c)?);
                if c.eat_sym(")") {
                    break;
                }
                c.expect_sym(",")?;
            }
        }
        return Ok(Formula::Atom(r, args));
    }
    let lhs = term(c)?;
    if c.eat_sym("=") {
        return Ok(Formula::Eq(lhs, term(c)?));
    }
    if c.eat_sym("!=") {
        return Ok(Formula::Not(Box::new(Formula::Eq(lhs, term(c)?))));
    }
    c.error("expected an atom, `=` or `!=`")
}

#[derive(Debug, Clone, Copy)]
enum CTerm {
    Slot(usize),
    Elem(usize),
}

#[derive(Debug, Clone)]
enum CForm {
    True,
    False,
    Atom(RelId, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
    Implies(Box<CForm>, Box<CForm>),
    Iff(Box<CForm>, Box<CForm>),
    Exists(usize, SortId, Box<CForm>),
    Forall(usize, SortId, Box<CForm>),
}

/// A sort-checked formula ready for evaluation.
#[derive(Debug, Clone)]
pub struct CheckedFormula {
    free: Vec<(String, SortId)>,
    slots: usize,
    body: CForm,
}

#[derive(Clone, Copy)]
enum Resolved {
    Var(usize),
    Elem(usize, SortId),
}

struct Checker<'a> {
    m: &'a Structure,
    scope: Vec<(String, usize)>,
    free: Vec<(String, Option<SortId>)>,
    slot_sorts: Vec<Option<SortId>>,
}

impl<'a> Checker<'a> {
    fn resolve(&mut self, t: &Term) -> Result<Resolved> {
        match t {
            Term::Element(e) => {
                let idx = self.m.element(e)?;
                Ok(Resolved::Elem(idx, self.m.sort_of(idx)))
            }
            Term::Name(n) => {
                if let Some((_, slot)) = self.scope.iter().rev().find(|(v, _)| v == n) {
                    return Ok(Resolved::Var(*slot));
                }
                if let Some(k) = self.m.constant(n) {
                    return Ok(Resolved::Elem(k.element, k.sort));
                }
                if let Some(i) = self.free.iter().position(|(v, _)| v == n) {
                    return Ok(Resolved::Var(i));
                }
                Err(Error::Variable(format!(
                    "variable `{n}` has no declared sort"
                )))
            }
        }
    }

    fn constrain(&mut self, slot: usize, sort: SortId, what: &str) -> Result<()> {
        match self.slot_sorts[slot] {
            Some(s) if s != sort => Err(Error::SortMismatch(format!(
                "{what}: expected sort `{}`, variable has sort `{}`",
                self.m.sorts()[sort].name,
                self.m.sorts()[s].name
            ))),
            Some(_) => Ok(()),
            None => {
                self.slot_sorts[slot] = Some(sort);
                Ok(())
            }
        }
    }

    fn new_slot(&mut self, sort: Option<SortId>) -> usize {
        self.slot_sorts.push(sort);
        self.slot_sorts.len() - 1
    }

    fn term(&mut self, t: &Term, sort: Option<SortId>, what: &str) -> Result<CTerm> {
        match self.resolve(t)? {
            Resolved::Var(slot) => {
                if let Some(s) = sort {
                    self.constrain(slot, s, what)?;
                }
                Ok(CTerm::Slot(slot))
            }
            Resolved::Elem(e, s) => {
                if let Some(expected) = sort {
                    if expected != s {
                        return Err(Error::SortMismatch(format!(
                            "{what}: `{}` is not of sort `{}`",
                            self.m.element_name(e),
                            self.m.sorts()[expected].name
                        )));
                    }
                }
                Ok(CTerm::Elem(e))
            }
        }
    }

    fn term_sort(&self, t: CTerm) -> Option<SortId> {
        match t {
            CTerm::Slot(s) => self.slot_sorts[s],
            CTerm::Elem(e) => Some(self.m.sort_of(e)),
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<CForm> {
        Ok(match f {
            Formula::True => CForm::True,
            Formula::False => CForm::False,
            Formula::Atom(r, args) => {
                let id = self.m.relation_id(r)?;
                let sig = self.m.relations()[id].signature.clone();
                if sig.len() != args.len() {
                    return Err(Error::SortMismatch(format!(
                        "`{r}` has arity {} but is applied to {} arguments",
                        sig.len(),
                        args.len()
                    )));
                }
                let cargs = args
                    .iter()
                    .zip(&sig)
                    .map(|(a, &s)| self.term(a, Some(s), &format!("argument of `{r}`")))
                    .collect::<Result<Vec<_>>>()?;
                CForm::Atom(id, cargs)
            }
            Formula::Eq(a, b) => {
                let ca = self.term(a, None, "equality")?;
                let cb = self.term(b, None, "equality")?;
                match (self.term_sort(ca), self.term_sort(cb)) {
                    (Some(s), _) => {
                        self.term(b, Some(s), "equality")?;
                    }
                    (None, Some(s)) => {
                        self.term(a, Some(s), "equality")?;
                    }
                    (None, None) => {}
                }
                CForm::Eq(ca, cb)
            }
            Formula::Not(p) => CForm::Not(Box::new(self.formula(p)?)),
            Formula::And(ps) => {
                CForm::And(ps.iter().map(|p| self.formula(p)).collect::<Result<_>>()?)
            }
            Formula::Or(ps) => {
                CForm::Or(ps.iter().map(|p| self.formula(p)).collect::<Result<_>>()?)
            }
            Formula::Implies(a, b) => {
                CForm::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Iff(a, b) => {
                CForm::Iff(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Exists(v, s, body) | Formula::Forall(v, s, body) => {
                let sort = self.m.sort_id(s)?;
                let slot = self.new_slot(Some(sort));
                self.scope.push((v.clone(), slot));
                let cbody = self.formula(body);
                self.scope.pop();
                let cbody = Box::new(cbody?);
                if matches!(f, Formula::Exists(..)) {
                    CForm::Exists(slot, sort, cbody)
                } else {
                    CForm::Forall(slot, sort, cbody)
                }
            }
        })
    }
}

/// Names that would be free variables of `f` (not bound, not constants), in
/// order of first occurrence.
fn free_names(m: &Structure, f: &Formula) -> Vec<String> {
    fn walk(m: &Structure, f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let see = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
            if let Term::Name(n) = t {
                if !bound.contains(n) && m.constant(n).is_none() && !out.contains(n) {
                    out.push(n.clone());
                }
            }
        };
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|a| see(a, bound, out)),
            Formula::Eq(a, b) => {
                see(a, bound, out);
                see(b, bound, out);
            }
            Formula::Not(p) => walk(m, p, bound, out),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| walk(m, p, bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                walk(m, a, bound, out);
                walk(m, b, bound, out);
            }
            Formula::Exists(v, _, p) | Formula::Forall(v, _, p) => {
                bound.push(v.clone());
                walk(m, p, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(m, f, &mut Vec::new(), &mut out);
    out
}

impl CheckedFormula {
    /// Sort-checks `f`. Free variables listed in `declared` take that order and
    /// sort; any remaining free variables are appended with inferred sorts.
    pub fn check(
        m: &Structure,
        f: &Formula,
        declared: &[(String, SortId)],
    ) -> Result<CheckedFormula> {
        let mut names: Vec<String> = declared.iter().map(|(v, _)| v.clone()).collect();
        for n in free_names(m, f) {
            if !names.contains(&n) {
                names.push(n);
            }
        }
        let mut ck = Checker {
            m,
            scope: Vec::new(),
            free: names.iter().map(|n| (n.clone(), None)).collect(),
            slot_sorts: vec![None; names.len()],
        };
        for (i, (_, s)) in declared.iter().enumerate() {
            ck.slot_sorts[i] = Some(*s);
        }
        // Sorts only ever go from unknown to known, so this reaches a fixpoint.
        let n = names.len();
        let (body, slots) = loop {
            let before = ck.slot_sorts[..n].to_vec();
            ck.slot_sorts.truncate(n);
            let body = ck.formula(f)?;
            if ck.slot_sorts[..n] == before[..] {
                break (body, ck.slot_sorts.len());
            }
        };
        let mut free = Vec::new();
        for (i, n) in names.iter().enumerate() {
            // A one-sorted structure leaves no room for doubt.
            let only = (m.sorts().len() == 1).then_some(0);
            let s = ck.slot_sorts[i]
                .or(only)
                .ok_or_else(|| Error::Variable(format!("cannot infer the sort of `{n}`")))?;
            free.push((n.clone(), s));
        }
        Ok(CheckedFormula { free, slots, body })
    }

    pub fn free_variables(&self) -> &[(String, SortId)] {
        &self.free
    }

    /// Evaluates with the free variables bound positionally to `values`.
    pub fn eval_tuple(&self, m: &Structure, values: &[usize]) -> bool {
        let mut env = vec![0usize; self.slots];
        env[..values.len()].copy_from_slice(values);
        eval(m, &self.body, &mut env)
    }
}

fn value(t: CTerm, env: &[usize]) -> usize {
    match t {
        CTerm::Slot(s) => env[s],
        CTerm::Elem(e) => e,
    }
}

fn eval(m: &Structure, f: &CForm, env: &mut Vec<usize>) -> bool {
    match f {
        CForm::True => true,
        CForm::False => false,
        CForm::Atom(r, args) => {
            let t: Vec<usize> = args.iter().map(|&a| value(a, env)).collect();
            m.relations()[*r].tuples.contains(&t)
        }
        CForm::Eq(a, b) => value(*a, env) == value(*b, env),
        CForm::Not(p) => !eval(m, p, env),
        CForm::And(ps) => ps.iter().all(|p| eval(m, p, env)),
        CForm::Or(ps) => ps.iter().any(|p| eval(m, p, env)),
        CForm::Implies(a, b) => !eval(m, a, env) || eval(m, b, env),
        CForm::Iff(a, b) => eval(m, a, env) == eval(m, b, env),
        CForm::Exists(slot, sort, body) => m.sorts()[*sort].elements.iter().any(|&e| {
            env[*slot] = e;
            eval(m, body, env)
        }),
        CForm::Forall(slot, sort, body) => m.sorts()[*sort].elements.iter().all(|&e| {
            env[*slot] = e;
            eval(m, body, env)
        }),
    }
}

/// How a [`DefinableSet`] was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Formula(String),
    OrbitUnion,
    Explicit,
}

/// A set of tuples over a fixed sort signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinableSet {
    pub signature: Vec<SortId>,
    pub tuples: BTreeSet<Vec<usize>>,
    pub provenance: Provenance,
}

impl DefinableSet {
    pub fn explicit(
        signature: Vec<SortId>,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> DefinableSet {
        DefinableSet {
            signature,
            tuples: tuples.into_iter().collect(),
            provenance: Provenance::Explicit,
        }
    }

    pub fn arity(&self) -> usize {
        self.signature.len()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.tuples.contains(t)
    }
}

/// Truth of `f` in `m` under `assignment` (variable name to universe index).
/// The assignment must cover exactly the free variables, respecting sorts.
pub fn eval_formula(
    m: &Structure,
    f: &Formula,
    assignment: &HashMap<String, usize>,
) -> Result<bool> {
    let checked = CheckedFormula::check(m, f, &[])?;
    let mut values = Vec::new();
    for (v, s) in checked.free_variables() {
        let e = *assignment
            .get(v)
            .ok_or_else(|| Error::Variable(format!("no value assigned to `{v}`")))?;
        if e >= m.size() {
            return Err(Error::UnknownElement(format!("#{e}")));
        }
        if m.sort_of(e) != *s {
            return Err(Error::SortMismatch(format!(
                "`{v}` has sort `{}` but is assigned `{}`",
                m.sorts()[*s].name,
                m.element_name(e)
            )));
        }
        values.push(e);
    }
    if let Some(extra) = assignment
        .keys()
        .find(|k| !checked.free_variables().iter().any(|(v, _)| v == *k))
    {
        return Err(Error::Variable(format!("`{extra}` is not a free variable")));
    }
    Ok(checked.eval_tuple(m, &values))
}

/// The tuples satisfying `f`, over its free variables in order of first occurrence.
pub fn defined_set(m: &Structure, f: &Formula) -> Result<DefinableSet> {
    defined_set_with(m, &[], f)
}

/// The tuples satisfying `f` over the declared variables (further free
/// variables are appended in order of occurrence).
pub fn defined_set_with(
    m: &Structure,
    declared: &[(String, SortId)],
    f: &Formula,
) -> Result<DefinableSet> {
    let checked = CheckedFormula::check(m, f, declared)?;
    let signature: Vec<SortId> = checked.free_variables().iter().map(|(_, s)| *s).collect();
    let mut tuples = BTreeSet::new();
    let domains: Vec<&[usize]> = signature
        .iter()
        .map(|&s| m.sorts()[s].elements.as_slice())
        .collect();
    for_each_tuple(&domains, |t| {
        if checked.eval_tuple(m, t) {
            tuples.insert(t.to_vec());
        }
    });
    Ok(DefinableSet {
        signature,
        tuples,
        provenance: Provenance::Formula(f.to_string()),
    })
}

/// The set defined by a comprehension `{ x:S, .. | φ }`.
pub fn comprehension_set(m: &Structure, c: &Comprehension) -> Result<DefinableSet> {
    let declared = c
        .vars
        .iter()
        .map(|(v, s)| Ok((v.clone(), m.sort_id(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let set = defined_set_with(m, &declared, &c.body)?;
    if set.arity() != declared.len() {
        return Err(Error::Variable(format!(
            "comprehension body has free variables beyond {:?}",
            c.vars.iter().map(|(v, _)| v).collect::<Vec<_>>()
        )));
    }
    Ok(set)
}

/// Calls `f` on every tuple of the cartesian product of `domains`.
pub fn for_each_tuple(domains: &[&[usize]], mut f: impl FnMut(&[usize])) {
    if domains.iter().any(|d| d.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut t: Vec<usize> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&t);
        let mut k = domains.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                t[k] = domains[k][idx[k]];
                break;
            }
            idx[k] = 0;
            t[k] = domains[k][0];
        }
    }
}
