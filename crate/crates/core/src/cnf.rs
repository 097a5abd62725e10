//! SAT instances: literals, clauses, DIMACS I/O, truth evaluation and the
//! brute-force model counter used as the reference oracle everywhere else.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default cap on `n` for [`CnfInstance::count_satisfying`].
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance must have at least one variable")]
    NoVariables,
    #[error("instance must have at least one clause")]
    NoClauses,
    #[error("clause must contain at least one literal")]
    EmptyClause,
    #[error("duplicate literal {0} in clause")]
    DuplicateLiteral(Literal),
    #[error("literal {lit} refers to a variable outside 1..={n}")]
    VariableOutOfRange { lit: Literal, n: usize },
    #[error("literal 0 is not a variable")]
    ZeroLiteral,
    #[error("assignment has length {got}, instance has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("brute-force count refused: n = {n} exceeds the limit {limit}")]
    LimitExceeded { n: usize, limit: usize },
}

fn parse_err(line: usize, msg: impl Into<String>) -> CnfError {
    CnfError::Parse {
        line,
        msg: msg.into(),
    }
}

/// `x_k` or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    variable: usize,
    negated: bool,
}

impl Literal {
    /// # Panics
    /// If `variable == 0`.
    pub fn new(variable: usize, negated: bool) -> Self {
        assert!(variable >= 1, "variables are 1-based");
        Literal { variable, negated }
    }

    pub fn pos(variable: usize) -> Self {
        Self::new(variable, false)
    }

    pub fn neg(variable: usize) -> Self {
        Self::new(variable, true)
    }

    /// Signed DIMACS form. Returns `None` for 0 or for an index that does not
    /// fit in `usize`.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let variable = usize::try_from(value.unsigned_abs()).ok()?;
        Some(Literal {
            variable,
            negated: value < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.variable as i64;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn variable(self) -> usize {
        self.variable
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Truth value `t(x)` under a variable value.
    #[inline]
    pub fn truth(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A nonempty set of literals, kept in input order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self, CnfError> {
        if literals.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for (i, lit) in literals.iter().enumerate() {
            if literals[..i].contains(lit) {
                return Err(CnfError::DuplicateLiteral(*lit));
            }
        }
        Ok(Clause { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// `card(C)`.
    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the clause contains both `x` and its negation.
    pub fn is_tautology(&self) -> bool {
        self.literals.iter().any(|a| {
            self.literals
                .iter()
                .any(|b| a.variable == b.variable && a.negated != b.negated)
        })
    }
}

/// A SAT instance: `n` variables and an ordered list of `m` clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    n: usize,
    clauses: Vec<Clause>,
}

/// Truth values for `x_1..x_n`; `bits[k - 1]` is the value of `x_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Assignment for basis label `e_i`. Variable 1 is the most significant
    /// of the `n` bits of `index`, matching the qubit order of the simulator.
    pub fn from_index(index: u64, n: usize) -> Self {
        let bits = (1..=n).map(|k| (index >> (n - k)) & 1 == 1).collect();
        Assignment { bits }
    }

    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn value(&self, variable: usize) -> bool {
        self.bits[variable - 1]
    }
}

impl CnfInstance {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if n == 0 {
            return Err(CnfError::NoVariables);
        }
        if clauses.is_empty() {
            return Err(CnfError::NoClauses);
        }
        for clause in &clauses {
            for &lit in clause.literals() {
                if lit.variable > n {
                    return Err(CnfError::VariableOutOfRange { lit, n });
                }
            }
        }
        Ok(CnfInstance { n, clauses })
    }

    /// Builds an instance from signed DIMACS-style literals.
    pub fn from_signed(n: usize, clauses: &[Vec<i64>]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| {
                let lits = c
                    .iter()
                    .map(|&v| {
                        Literal::from_dimacs(v).ok_or(CnfError::ZeroLiteral)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Clause::new(lits)
            })
            .collect::<Result<Vec<_>, _>>()?;
        CnfInstance::new(n, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// `t(C) = AND_j OR_{x in C_j} t(x)`.
    pub fn evaluate(&self, a: &Assignment) -> Result<bool, CnfError> {
        if a.len() != self.n {
            return Err(CnfError::AssignmentLength {
                expected: self.n,
                got: a.len(),
            });
        }
        Ok(self.clauses.iter().all(|c| {
            c.literals()
                .iter()
                .any(|lit| lit.truth(a.value(lit.variable)))
        }))
    }

    /// Number of satisfying assignments `r = |T(C)|`, refusing when `n`
    /// exceeds [`DEFAULT_BRUTE_FORCE_LIMIT`].
    pub fn count_satisfying(&self) -> Result<u64, CnfError> {
        self.count_satisfying_with_limit(DEFAULT_BRUTE_FORCE_LIMIT)
    }

    pub fn count_satisfying_with_limit(&self, limit: usize) -> Result<u64, CnfError> {
        // Index arithmetic below is on u64.
        let limit = limit.min(63);
        if self.n > limit {
            return Err(CnfError::LimitExceeded { n: self.n, limit });
        }
        let masks = self.clause_masks();
        let total = 1u64 << self.n;
        let count = (0..total)
            .into_par_iter()
            .filter(|&i| masks.iter().all(|&(pos, neg)| i & pos != 0 || !i & neg != 0))
            .count();
        Ok(count as u64)
    }

    /// Per-clause (positive, negative) bit masks over the assignment index,
    /// with variable `k` at bit `n - k`.
    fn clause_masks(&self) -> Vec<(u64, u64)> {
        self.clauses
            .iter()
            .map(|c| {
                c.literals().iter().fold((0u64, 0u64), |(pos, neg), lit| {
                    let bit = 1u64 << (self.n - lit.variable);
                    if lit.negated {
                        (pos, neg | bit)
                    } else {
                        (pos | bit, neg)
                    }
                })
            })
            .collect()
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause.literals() {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn parse_dimacs(text: &str) -> Result<Self, CnfError> {
        parse_dimacs(text)
    }
}

/// Parses DIMACS CNF: `c` comment lines, one `p cnf <n> <m>` header, then `m`
/// zero-terminated clauses (which may span lines). A `%` line ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfInstance, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "duplicate problem line"));
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let (n, m) = header.ok_or_else(|| parse_err(line_no, "clause before `p cnf` header"))?;
        for tok in line.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid literal `{tok}`")))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(parse_err(line_no, "empty clause"));
                }
                if clauses.len() == m {
                    return Err(parse_err(
                        line_no,
                        format!("more clauses than the {m} declared"),
                    ));
                }
                let clause = Clause::new(std::mem::take(&mut current)).map_err(|e| {
                    parse_err(current_start, e.to_string())
                })?;
                clauses.push(clause);
                continue;
            }
            let lit = Literal::from_dimacs(value)
                .ok_or_else(|| parse_err(line_no, format!("invalid literal `{tok}`")))?;
            if lit.variable > n {
                return Err(parse_err(
                    line_no,
                    format!("variable {} exceeds n={n}", lit.variable),
                ));
            }
            if current.is_empty() {
                current_start = line_no;
            }
            current.push(lit);
        }
    }

    let (n, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(parse_err(current_start, "clause not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(parse_err(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfInstance::new(n, clauses).map_err(|e| parse_err(last_line.max(1), e.to_string()))
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), CnfError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(parse_err(line_no, "malformed header, expected `p cnf <n> <m>`"));
    }
    let n: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid variable count `{}`", fields[2])))?;
    let m: usize = fields[3]
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid clause count `{}`", fields[3])))?;
    if n == 0 {
        return Err(parse_err(line_no, "variable count must be at least 1"));
    }
    if m == 0 {
        return Err(parse_err(line_no, "clause count must be at least 1"));
    }
    Ok((n, m))
}

/// Canonical JSON form: `{"n": int, "clauses": [[signed ints]]}`.
#[derive(Serialize, Deserialize)]
struct CanonicalInstance {
    n: usize,
    clauses: Vec<Vec<i64>>,
}

impl Serialize for CnfInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CanonicalInstance {
            n: self.n,
            clauses: self
                .clauses
                .iter()
                .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CnfInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = CanonicalInstance::deserialize(deserializer)?;
        CnfInstance::from_signed(raw.n, &raw.clauses).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(n: usize, clauses: &[&[i64]]) -> CnfInstance {
        let owned: Vec<Vec<i64>> = clauses.iter().map(|c| c.to_vec()).collect();
        CnfInstance::from_signed(n, &owned).unwrap()
    }

    fn a(bits: &[u8]) -> Assignment {
        Assignment::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn parses_two_clause_example() {
        let got = parse_dimacs("p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(got, inst(2, &[&[1, 2], &[-1]]));
        assert!(got.clauses()[1].literals()[0].is_negated());
    }

    #[test]
    fn parses_minimal_instance() {
        let got = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(got.num_vars(), 1);
        assert_eq!(got.clauses(), &[Clause::new(vec![Literal::pos(1)]).unwrap()]);
    }

    #[test]
    fn rejects_variable_beyond_n() {
        let err = parse_dimacs("p cnf 2 1\n3 0\n").unwrap_err();
        assert_eq!(
            err,
            CnfError::Parse {
                line: 2,
                msg: "variable 3 exceeds n=2".into()
            }
        );
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("p cnf x 1\n1 0\n", 1),
            ("c hi\np dnf 1 1\n1 0\n", 2),
            ("p cnf 2 2\n1 0\n", 2),
            ("p cnf 2 1\n1 0\n2 0\n", 3),
            ("p cnf 2 1\n1\n 0 0\n", 3),
            ("p cnf 2 1\n1 1 0\n", 2),
            ("p cnf 2 1\n1 -2\n", 2),
            ("1 0\n", 1),
            ("p cnf 2 1\n1 a 0\n", 2),
        ];
        for (text, line) in cases {
            match parse_dimacs(text) {
                Err(CnfError::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn accepts_comments_multiline_clauses_and_percent_trailer() {
        let text = "c a comment\np cnf 3 2\n1 -2\n 3 0 -3\n0\n%\n0\n";
        assert_eq!(parse_dimacs(text).unwrap(), inst(3, &[&[1, -2, 3], &[-3]]));
    }

    #[test]
    fn evaluates_examples() {
        assert!(inst(2, &[&[1, 2]]).evaluate(&a(&[0, 1])).unwrap());
        let contra = inst(1, &[&[1], &[-1]]);
        assert!(!contra.evaluate(&a(&[0])).unwrap());
        assert!(!contra.evaluate(&a(&[1])).unwrap());
        assert!(inst(2, &[&[1, 2], &[-1]]).evaluate(&a(&[0, 1])).unwrap());
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let err = inst(2, &[&[1, 2]]).evaluate(&a(&[1])).unwrap_err();
        assert_eq!(err, CnfError::AssignmentLength { expected: 2, got: 1 });
    }

    #[test]
    fn tautologies_are_allowed_and_true() {
        let t = inst(1, &[&[1, -1]]);
        assert!(t.clauses()[0].is_tautology());
        assert_eq!(t.count_satisfying().unwrap(), 2);
    }

    #[test]
    fn counts_examples() {
        assert_eq!(inst(2, &[&[1, 2]]).count_satisfying().unwrap(), 3);
        assert_eq!(inst(1, &[&[1], &[-1]]).count_satisfying().unwrap(), 0);
        assert_eq!(inst(2, &[&[1, 2], &[-1, 2]]).count_satisfying().unwrap(), 2);
    }

    #[test]
    fn count_refuses_beyond_limit() {
        let big = inst(25, &[&[25]]);
        assert_eq!(
            big.count_satisfying().unwrap_err(),
            CnfError::LimitExceeded { n: 25, limit: 24 }
        );
        assert_eq!(big.count_satisfying_with_limit(25).unwrap(), 1 << 24);
    }

    #[test]
    fn invalid_construction() {
        assert_eq!(CnfInstance::new(0, vec![]), Err(CnfError::NoVariables));
        assert_eq!(CnfInstance::new(1, vec![]), Err(CnfError::NoClauses));
        assert_eq!(Clause::new(vec![]), Err(CnfError::EmptyClause));
    }

    #[test]
    fn index_round_trip_is_msb_first() {
        let asg = Assignment::from_index(0b10, 2);
        assert_eq!(asg.bits(), &[true, false]);
        assert_eq!(asg.to_index(), 2);
    }

    #[test]
    fn json_canonical_form() {
        let i = inst(2, &[&[1, 2], &[-1]]);
        let text = serde_json::to_string(&i).unwrap();
        assert_eq!(text, r#"{"n":2,"clauses":[[1,2],[-1]]}"#);
        let back: CnfInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, i);
        assert!(serde_json::from_str::<CnfInstance>(r#"{"n":1,"clauses":[[2]]}"#).is_err());
    }

    pub(crate) fn arb_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = CnfInstance> {
        (1..=max_n).prop_flat_map(move |n| {
            let clause = proptest::collection::btree_set((1..=n, any::<bool>()), 1..=n.min(4))
                .prop_map(|set| {
                    Clause::new(set.into_iter().map(|(v, neg)| Literal::new(v, neg)).collect())
                        .unwrap()
                });
            proptest::collection::vec(clause, 1..=max_m)
                .prop_map(move |clauses| CnfInstance::new(n, clauses).unwrap())
        })
    }

    proptest! {
        #[test]
        fn count_equals_sum_of_evaluations(instance in arb_instance(8, 10)) {
            let n = instance.num_vars();
            let sum: u64 = (0..1u64 << n)
                .map(|i| u64::from(instance.evaluate(&Assignment::from_index(i, n)).unwrap()))
                .sum();
            prop_assert_eq!(instance.count_satisfying().unwrap(), sum);
        }

        #[test]
        fn dimacs_round_trip(instance in arb_instance(10, 12)) {
            prop_assert_eq!(parse_dimacs(&instance.to_dimacs()).unwrap(), instance);
        }

        #[test]
        fn adding_a_satisfied_literal_never_falsifies(
            instance in arb_instance(6, 6),
            index in any::<u64>(),
            pick in any::<usize>(),
        ) {
            let n = instance.num_vars();
            let asg = Assignment::from_index(index & ((1 << n) - 1), n);
            let before = instance.evaluate(&asg).unwrap();
            let var = pick % n + 1;
            let lit = Literal::new(var, !asg.value(var));
            let mut clauses = instance.clauses().to_vec();
            let k = pick % clauses.len();
            let mut lits = clauses[k].literals().to_vec();
            if !lits.contains(&lit) {
                lits.push(lit);
            }
            clauses[k] = Clause::new(lits).unwrap();
            let after = CnfInstance::new(n, clauses).unwrap().evaluate(&asg).unwrap();
            prop_assert!(after >= before);
        }
    }
}
