//! Resolved CEFSM models.

use resilience_core::EdgeKind;

#[derive(Clone, Debug, PartialEq)]
pub struct CefsmModel {
    pub vars: Vec<VarDecl>,
    pub channels: Vec<String>,
    pub templates: Vec<Template>,
    /// Disjunction of all `error` lines; `None` if the model has none.
    pub error: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub name: String,
    pub count: u32,
    pub locations: Vec<String>,
    pub initial: usize,
    pub transitions: Vec<LocalTransition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalTransition {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
    pub guard: Option<Expr>,
    pub sync: Option<Sync>,
    pub updates: Vec<Update>,
    /// Source line, for diagnostics.
    pub line: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sync {
    Send(usize),
    Recv(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Update {
    pub var: usize,
    pub op: UpdateOp,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UpdateOp {
    Inc,
    Dec,
    Assign(Expr),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

/// Integer-valued expression; booleans are 0 and 1, any nonzero value is
/// true.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Var(usize),
    /// Number of replicas of template `.0` in location `.1`.
    Occupancy(usize, usize),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, var: &dyn Fn(usize) -> i64, occ: &dyn Fn(usize, usize) -> i64) -> i64 {
        match self {
            Expr::Int(v) => *v,
            Expr::Var(i) => var(*i),
            Expr::Occupancy(t, l) => occ(*t, *l),
            Expr::Not(e) => (e.eval(var, occ) == 0) as i64,
            Expr::Neg(e) => -e.eval(var, occ),
            Expr::Bin(op, a, b) => {
                let x = a.eval(var, occ);
                // short-circuit the boolean connectives
                match op {
                    BinOp::Or if x != 0 => return 1,
                    BinOp::And if x == 0 => return 0,
                    _ => {}
                }
                let y = b.eval(var, occ);
                match op {
                    BinOp::Or | BinOp::And => (y != 0) as i64,
                    BinOp::Eq => (x == y) as i64,
                    BinOp::Ne => (x != y) as i64,
                    BinOp::Lt => (x < y) as i64,
                    BinOp::Le => (x <= y) as i64,
                    BinOp::Gt => (x > y) as i64,
                    BinOp::Ge => (x >= y) as i64,
                    BinOp::Add => x.saturating_add(y),
                    BinOp::Sub => x.saturating_sub(y),
                    BinOp::Mul => x.saturating_mul(y),
                }
            }
        }
    }
}

impl CefsmModel {
    pub fn template(&self, name: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.name == name)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }
}
