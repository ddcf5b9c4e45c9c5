use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::expr::{self, BinOp, CmpOp, Expr};
use super::{EngineError, Initial, ModelDefinition, TimeGrid, Trajectory};

#[derive(Debug, Clone, Copy)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
}

/// One node of the flattened expression arena. Children are arena indices.
#[derive(Debug, Clone, Copy)]
enum Node {
    Const(f64),
    Load(u32),
    Param(u32),
    Time,
    Dt,
    Neg(u32),
    Bin(BinOp, u32, u32),
    Cmp(CmpOp, u32, u32),
    Func(Func, u32),
    Min(u32, u32),
    Max(u32, u32),
    If(u32, u32, u32),
    Lookup(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symbol {
    Slot(u32),
    Param(u32),
    Table(u32),
}

/// Immutable compiled form shared by every instance of a model.
#[derive(Debug)]
struct Plan {
    definition: ModelDefinition,
    /// Stocks, then auxiliaries, then flows.
    names: Arc<[String]>,
    n_stocks: usize,
    n_aux: usize,
    nodes: Vec<Node>,
    args: Vec<u32>,
    /// Root node per slot; for stocks this is the initial-value expression.
    roots: Vec<u32>,
    /// Auxiliary and flow slots in dependency order.
    order: Vec<u32>,
    flow_ends: Vec<(Option<u32>, Option<u32>)>,
    tables: Vec<Vec<[f64; 2]>>,
    symbols: HashMap<String, Symbol>,
    param_names: Vec<String>,
}

/// A compiled model plus its own parameter values. Cloning is cheap: the
/// compiled plan is shared.
#[derive(Debug, Clone)]
pub struct ExecutableModel {
    plan: Arc<Plan>,
    params: Vec<f64>,
}

struct Builder<'a> {
    symbols: &'a HashMap<String, Symbol>,
    nodes: Vec<Node>,
    args: Vec<u32>,
}

impl Builder<'_> {
    fn push(&mut self, node: Node) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    fn lower(&mut self, owner: &str, e: &Expr) -> Result<u32, EngineError> {
        let invalid = |reason: String| EngineError::InvalidEquation {
            variable: owner.to_string(),
            reason,
        };
        let node = match e {
            Expr::Number(v) => Node::Const(*v),
            Expr::Ident(name) => match name.as_str() {
                "time" => Node::Time,
                "dt" => Node::Dt,
                _ => match self.symbols.get(name) {
                    Some(Symbol::Slot(i)) => Node::Load(*i),
                    Some(Symbol::Param(i)) => Node::Param(*i),
                    Some(Symbol::Table(_)) => {
                        return Err(invalid(format!(
                            "table `{name}` must be applied with lookup({name}, x)"
                        )))
                    }
                    None => {
                        return Err(EngineError::UnknownReference {
                            variable: owner.to_string(),
                            name: name.clone(),
                        })
                    }
                },
            },
            Expr::Neg(a) => Node::Neg(self.lower(owner, a)?),
            Expr::Binary(op, a, b) => {
                let a = self.lower(owner, a)?;
                Node::Bin(*op, a, self.lower(owner, b)?)
            }
            Expr::Compare(op, a, b) => {
                let a = self.lower(owner, a)?;
                Node::Cmp(*op, a, self.lower(owner, b)?)
            }
            Expr::Call(name, call_args) => {
                let arity = |n: usize| -> Result<(), EngineError> {
                    if call_args.len() == n {
                        Ok(())
                    } else {
                        Err(invalid(format!(
                            "{name}() takes {n} argument(s), got {}",
                            call_args.len()
                        )))
                    }
                };
                match name.as_str() {
                    "exp" | "ln" | "sqrt" | "abs" => {
                        arity(1)?;
                        let f = match name.as_str() {
                            "exp" => Func::Exp,
                            "ln" => Func::Ln,
                            "sqrt" => Func::Sqrt,
                            _ => Func::Abs,
                        };
                        Node::Func(f, self.lower(owner, &call_args[0])?)
                    }
                    "min" | "max" => {
                        if call_args.is_empty() {
                            return Err(invalid(format!("{name}() needs arguments")));
                        }
                        let lowered = call_args
                            .iter()
                            .map(|a| self.lower(owner, a))
                            .collect::<Result<Vec<_>, _>>()?;
                        let start = self.args.len() as u32;
                        self.args.extend(lowered);
                        let len = call_args.len() as u32;
                        if name == "min" {
                            Node::Min(start, len)
                        } else {
                            Node::Max(start, len)
                        }
                    }
                    "if" => {
                        arity(3)?;
                        let c = self.lower(owner, &call_args[0])?;
                        let a = self.lower(owner, &call_args[1])?;
                        Node::If(c, a, self.lower(owner, &call_args[2])?)
                    }
                    "lookup" => {
                        arity(2)?;
                        let table = match &call_args[0] {
                            Expr::Ident(t) => match self.symbols.get(t) {
                                Some(Symbol::Table(i)) => *i,
                                Some(_) => return Err(invalid(format!("`{t}` is not a table"))),
                                None => {
                                    return Err(EngineError::UnknownReference {
                                        variable: owner.to_string(),
                                        name: t.clone(),
                                    })
                                }
                            },
                            _ => {
                                return Err(invalid(
                                    "first argument of lookup() must be a table name".into(),
                                ))
                            }
                        };
                        Node::Lookup(table, self.lower(owner, &call_args[1])?)
                    }
                    other => return Err(invalid(format!("unknown function `{other}`"))),
                }
            }
        };
        Ok(self.push(node))
    }
}

fn parse_equation(owner: &str, src: &str) -> Result<Expr, EngineError> {
    expr::parse(src).map_err(|source| EngineError::Parse {
        variable: owner.to_string(),
        source,
    })
}

/// Slots read by an expression, used for dependency ordering.
fn slot_refs(e: &Expr, symbols: &HashMap<String, Symbol>, out: &mut Vec<u32>) {
    for name in e.references() {
        if let Some(Symbol::Slot(i)) = symbols.get(name) {
            out.push(*i);
        }
    }
}

/// Resolves names, orders auxiliaries and flows by dependency, and lowers
/// every equation into the evaluation arena.
pub fn compile_model(def: &ModelDefinition) -> Result<ExecutableModel, EngineError> {
    let n_stocks = def.stocks.len();
    let n_aux = def.auxiliaries.len();
    let n_slots = n_stocks + n_aux + def.flows.len();

    let mut symbols: HashMap<String, Symbol> = HashMap::new();
    let mut declare = |name: &str, sym: Symbol| -> Result<(), EngineError> {
        if name == "time" || name == "dt" || symbols.insert(name.to_string(), sym).is_some() {
            return Err(EngineError::DuplicateName(name.to_string()));
        }
        Ok(())
    };
    let slot_names: Vec<String> = def
        .stocks
        .iter()
        .map(|s| s.name.clone())
        .chain(def.auxiliaries.iter().map(|a| a.name.clone()))
        .chain(def.flows.iter().map(|f| f.name.clone()))
        .collect();
    for (i, name) in slot_names.iter().enumerate() {
        declare(name, Symbol::Slot(i as u32))?;
    }
    for (i, p) in def.parameters.iter().enumerate() {
        declare(&p.name, Symbol::Param(i as u32))?;
    }
    for (i, t) in def.tables.iter().enumerate() {
        declare(&t.name, Symbol::Table(i as u32))?;
        t.validate().map_err(|reason| EngineError::InvalidTable {
            table: t.name.clone(),
            reason,
        })?;
    }

    // Parse everything up front so errors surface before ordering.
    let mut equations: Vec<Expr> = Vec::with_capacity(n_slots);
    for s in &def.stocks {
        equations.push(match &s.initial {
            Initial::Value(v) => Expr::Number(*v),
            Initial::Expression(src) => parse_equation(&s.name, src)?,
        });
    }
    for a in &def.auxiliaries {
        equations.push(parse_equation(&a.name, &a.equation)?);
    }
    for f in &def.flows {
        equations.push(parse_equation(&f.name, &f.rate)?);
    }

    for (i, eq) in equations.iter().enumerate().take(n_stocks) {
        let mut refs = Vec::new();
        slot_refs(eq, &symbols, &mut refs);
        if let Some(r) = refs.first() {
            return Err(EngineError::InvalidEquation {
                variable: slot_names[i].clone(),
                reason: format!(
                    "initial value may only use parameters and tables, found `{}`",
                    slot_names[*r as usize]
                ),
            });
        }
    }

    let mut flow_ends = Vec::with_capacity(def.flows.len());
    for f in &def.flows {
        let end = |name: &Option<String>| -> Result<Option<u32>, EngineError> {
            match name {
                None => Ok(None),
                Some(n) => match symbols.get(n) {
                    Some(Symbol::Slot(i)) if (*i as usize) < n_stocks => Ok(Some(*i)),
                    _ => Err(EngineError::UnknownReference {
                        variable: f.name.clone(),
                        name: n.clone(),
                    }),
                },
            }
        };
        flow_ends.push((end(&f.from)?, end(&f.to)?));
    }

    let mut builder = Builder {
        symbols: &symbols,
        nodes: Vec::new(),
        args: Vec::new(),
    };
    let mut roots = Vec::with_capacity(n_slots);
    for (i, eq) in equations.iter().enumerate() {
        roots.push(builder.lower(&slot_names[i], eq)?);
    }

    let order = dependency_order(&equations, &symbols, n_stocks, &slot_names)?;

    let Builder { nodes, args, .. } = builder;
    let plan = Plan {
        definition: def.clone(),
        names: slot_names.into(),
        n_stocks,
        n_aux,
        nodes,
        args,
        roots,
        order,
        flow_ends,
        tables: def.tables.iter().map(|t| t.points.clone()).collect(),
        symbols,
        param_names: def.parameters.iter().map(|p| p.name.clone()).collect(),
    };
    Ok(ExecutableModel {
        params: def.parameters.iter().map(|p| p.value).collect(),
        plan: Arc::new(plan),
    })
}

/// Kahn's algorithm over auxiliaries and flows; stocks are sources. Ties are
/// broken by declaration order so the plan is deterministic.
fn dependency_order(
    equations: &[Expr],
    symbols: &HashMap<String, Symbol>,
    n_stocks: usize,
    names: &[String],
) -> Result<Vec<u32>, EngineError> {
    let n = equations.len() - n_stocks;
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, eq) in equations[n_stocks..].iter().enumerate() {
        let mut refs = Vec::new();
        slot_refs(eq, symbols, &mut refs);
        refs.sort_unstable();
        refs.dedup();
        for r in refs {
            let r = r as usize;
            if r >= n_stocks {
                let i = r - n_stocks;
                dependents[i].push(j);
                deps[j].push(i);
                indegree[j] += 1;
            }
        }
    }
    let mut ready: VecDeque<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_front() {
        order.push((i + n_stocks) as u32);
        for &j in &dependents[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push_back(j);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Walk unresolved dependencies until a node repeats to name one cycle.
    let start = (0..n).find(|&j| indegree[j] > 0).unwrap_or(0);
    let mut path = vec![start];
    let mut seen = vec![usize::MAX; n];
    seen[start] = 0;
    let mut cur = start;
    loop {
        let next = deps[cur]
            .iter()
            .copied()
            .find(|&d| indegree[d] > 0)
            .unwrap_or(cur);
        if seen[next] != usize::MAX {
            let cycle = path[seen[next]..]
                .iter()
                .chain(std::iter::once(&next))
                .map(|&j| names[j + n_stocks].clone())
                .collect();
            return Err(EngineError::AlgebraicLoop { cycle });
        }
        seen[next] = path.len();
        path.push(next);
        cur = next;
    }
}

impl Plan {
    fn eval(&self, n: u32, vals: &[f64], params: &[f64], t: f64, dt: f64) -> f64 {
        match self.nodes[n as usize] {
            Node::Const(v) => v,
            Node::Load(i) => vals[i as usize],
            Node::Param(i) => params[i as usize],
            Node::Time => t,
            Node::Dt => dt,
            Node::Neg(a) => -self.eval(a, vals, params, t, dt),
            Node::Bin(op, a, b) => {
                let a = self.eval(a, vals, params, t, dt);
                let b = self.eval(b, vals, params, t, dt);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Node::Cmp(op, a, b) => {
                let a = self.eval(a, vals, params, t, dt);
                let b = self.eval(b, vals, params, t, dt);
                let r = match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                };
                if r {
                    1.0
                } else {
                    0.0
                }
            }
            Node::Func(f, a) => {
                let a = self.eval(a, vals, params, t, dt);
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                }
            }
            Node::Min(start, len) => self.args[start as usize..(start + len) as usize]
                .iter()
                .map(|&a| self.eval(a, vals, params, t, dt))
                .fold(f64::INFINITY, f64::min),
            Node::Max(start, len) => self.args[start as usize..(start + len) as usize]
                .iter()
                .map(|&a| self.eval(a, vals, params, t, dt))
                .fold(f64::NEG_INFINITY, f64::max),
            Node::If(c, a, b) => {
                if self.eval(c, vals, params, t, dt) != 0.0 {
                    self.eval(a, vals, params, t, dt)
                } else {
                    self.eval(b, vals, params, t, dt)
                }
            }
            Node::Lookup(table, x) => {
                let x = self.eval(x, vals, params, t, dt);
                super::lookup_eval(&self.tables[table as usize], x)
            }
        }
    }
}

impl ExecutableModel {
    pub fn definition(&self) -> &ModelDefinition {
        &self.plan.definition
    }

    /// Variable names in recording order: stocks, auxiliaries, flows.
    pub fn variable_names(&self) -> &[String] {
        &self.plan.names
    }

    pub fn stock_names(&self) -> &[String] {
        &self.plan.names[..self.plan.n_stocks]
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.plan.param_names
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        match self.plan.symbols.get(name) {
            Some(Symbol::Param(i)) => Some(self.params[*i as usize]),
            _ => None,
        }
    }

    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), EngineError> {
        match self.plan.symbols.get(name) {
            Some(Symbol::Param(i)) => {
                self.params[*i as usize] = value;
                Ok(())
            }
            _ => Err(EngineError::UnknownParameter(name.to_string())),
        }
    }

    /// A copy of this model sharing the compiled plan, with some parameters
    /// replaced.
    pub fn with_parameters<'a>(
        &self,
        overrides: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self, EngineError> {
        let mut out = self.clone();
        for (name, value) in overrides {
            out.set_parameter(name, value)?;
        }
        Ok(out)
    }

    /// The plan index of the named auxiliary's dependency order, exposed for
    /// diagnostics and tests.
    pub fn evaluation_order(&self) -> Vec<&str> {
        self.plan
            .order
            .iter()
            .map(|&s| self.plan.names[s as usize].as_str())
            .collect()
    }

    pub fn initial_state(&self, t0: f64, dt: f64) -> Result<Vec<f64>, EngineError> {
        let plan = &*self.plan;
        let empty: [f64; 0] = [];
        (0..plan.n_stocks)
            .map(|i| {
                let v = plan.eval(plan.roots[i], &empty, &self.params, t0, dt);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(EngineError::NonFiniteValue {
                        variable: plan.names[i].clone(),
                        time: t0,
                        value: v,
                    })
                }
            })
            .collect()
    }

    /// Evaluates every auxiliary and flow in `vals` given the stock values
    /// already stored in its leading slots.
    fn evaluate(&self, vals: &mut [f64], t: f64, dt: f64) -> Result<(), EngineError> {
        let plan = &*self.plan;
        for &slot in &plan.order {
            let v = plan.eval(plan.roots[slot as usize], vals, &self.params, t, dt);
            if !v.is_finite() {
                return Err(EngineError::NonFiniteValue {
                    variable: plan.names[slot as usize].clone(),
                    time: t,
                    value: v,
                });
            }
            vals[slot as usize] = v;
        }
        Ok(())
    }

    /// Euler update of the stock slots of `vals` from the flows already
    /// evaluated in it.
    fn integrate(
        &self,
        vals: &mut [f64],
        net: &mut [f64],
        t_next: f64,
        dt: f64,
    ) -> Result<(), EngineError> {
        let plan = &*self.plan;
        net.fill(0.0);
        let flow_base = plan.n_stocks + plan.n_aux;
        for (k, &(from, to)) in plan.flow_ends.iter().enumerate() {
            let rate = vals[flow_base + k];
            if let Some(s) = from {
                net[s as usize] -= rate;
            }
            if let Some(s) = to {
                net[s as usize] += rate;
            }
        }
        for (i, d) in net.iter().enumerate() {
            let v = vals[i] + dt * d;
            if !v.is_finite() {
                return Err(EngineError::NonFiniteValue {
                    variable: plan.names[i].clone(),
                    time: t_next,
                    value: v,
                });
            }
            vals[i] = v;
        }
        Ok(())
    }

    /// One Euler step from stock values `state` at time `t`.
    pub fn step(&self, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, EngineError> {
        let plan = &*self.plan;
        if state.len() != plan.n_stocks {
            return Err(EngineError::StateLength {
                expected: plan.n_stocks,
                got: state.len(),
            });
        }
        if let Some(i) = state.iter().position(|v| !v.is_finite()) {
            return Err(EngineError::NonFiniteValue {
                variable: plan.names[i].clone(),
                time: t,
                value: state[i],
            });
        }
        let mut vals = vec![0.0; plan.names.len()];
        vals[..plan.n_stocks].copy_from_slice(state);
        self.evaluate(&mut vals, t, dt)?;
        let mut net = vec![0.0; plan.n_stocks];
        self.integrate(&mut vals, &mut net, t + dt, dt)?;
        vals.truncate(plan.n_stocks);
        Ok(vals)
    }

    /// Integrates over `grid`, recording every variable at every grid point.
    pub fn run(&self, grid: &TimeGrid) -> Result<Trajectory, EngineError> {
        let plan = &*self.plan;
        let points = grid.len();
        let n = plan.names.len();
        let dt = grid.step;
        let mut vals = vec![0.0; n];
        vals[..plan.n_stocks].copy_from_slice(&self.initial_state(grid.start, dt)?);
        let mut net = vec![0.0; plan.n_stocks];
        let mut data = vec![0.0; n * points];
        for k in 0..points {
            let t = grid.time(k);
            self.evaluate(&mut vals, t, dt)?;
            for (slot, v) in vals.iter().enumerate() {
                data[slot * points + k] = *v;
            }
            if k + 1 < points {
                self.integrate(&mut vals, &mut net, grid.time(k + 1), dt)?;
            }
        }
        Ok(Trajectory::from_parts(*grid, plan.names.clone(), data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> ModelDefinition {
        let mut def = ModelDefinition::default();
        def.stock("S", 100.0)
            .param("k", 0.1)
            .flow("outflow", Some("S"), None, "k * S");
        def
    }

    #[test]
    fn order_follows_dependencies() {
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0)
            .flow("f", None, Some("S"), "a")
            .aux("a", "2 * S");
        let m = compile_model(&def).unwrap();
        assert_eq!(m.evaluation_order(), vec!["a", "f"]);
    }

    #[test]
    fn two_node_loop_is_rejected() {
        let mut def = ModelDefinition::default();
        def.aux("a", "b").aux("b", "a");
        match compile_model(&def) {
            Err(EngineError::AlgebraicLoop { cycle }) => {
                assert!(cycle.contains(&"a".to_string()));
                assert!(cycle.contains(&"b".to_string()));
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected loop, got {other:?}"),
        }
    }

    #[test]
    fn loop_through_stock_is_fine() {
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0)
            .aux("a", "S + b")
            .aux("b", "S * 2")
            .flow("f", None, Some("S"), "a");
        assert!(compile_model(&def).is_ok());
    }

    #[test]
    fn undeclared_name_is_reported() {
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0).flow("f", None, Some("S"), "q");
        match compile_model(&def) {
            Err(EngineError::UnknownReference { variable, name }) => {
                assert_eq!(variable, "f");
                assert_eq!(name, "q");
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0)
            .flow("f", Some("nowhere"), Some("S"), "1");
        assert!(matches!(
            compile_model(&def),
            Err(EngineError::UnknownReference { .. })
        ));
    }

    #[test]
    fn duplicate_names_across_categories() {
        let mut def = ModelDefinition::default();
        def.stock("x", 1.0).param("x", 2.0);
        assert!(matches!(compile_model(&def), Err(EngineError::DuplicateName(n)) if n == "x"));
        let mut def = ModelDefinition::default();
        def.param("time", 2.0);
        assert!(matches!(
            compile_model(&def),
            Err(EngineError::DuplicateName(_))
        ));
    }

    #[test]
    fn bad_equations() {
        let cases = ["lookup(k, 1)", "g", "foo(1)", "exp(1, 2)", "lookup(1, 2)"];
        for eq in cases {
            let mut def = ModelDefinition::default();
            def.param("k", 1.0)
                .table("g", vec![[0.0, 0.0], [1.0, 1.0]])
                .aux("a", eq);
            assert!(compile_model(&def).is_err(), "{eq} should fail");
        }
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0).stock("T", "S");
        assert!(matches!(
            compile_model(&def),
            Err(EngineError::InvalidEquation { .. })
        ));
    }

    #[test]
    fn one_euler_step() {
        let mut def = ModelDefinition::default();
        def.stock("S", 100.0)
            .flow("in", None, Some("S"), "0.05 * S");
        let m = compile_model(&def).unwrap();
        assert_eq!(m.step(&[100.0], 2015.0, 1.0).unwrap(), vec![105.0]);
    }

    #[test]
    fn zero_flows_leave_state() {
        let mut def = ModelDefinition::default();
        def.stock("A", 3.0)
            .stock("B", 4.0)
            .flow("f", Some("A"), Some("B"), "0");
        let m = compile_model(&def).unwrap();
        assert_eq!(m.step(&[3.0, 4.0], 0.0, 1.0).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn conservative_transfer() {
        let mut def = ModelDefinition::default();
        def.stock("A", 10.0)
            .stock("B", 0.0)
            .flow("f", Some("A"), Some("B"), "2");
        let m = compile_model(&def).unwrap();
        let next = m.step(&[10.0, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(next, vec![8.0, 2.0]);
        assert_eq!(next[0] + next[1], 10.0);
    }

    #[test]
    fn decay_matches_euler_recurrence() {
        let m = compile_model(&decay()).unwrap();
        let traj = m.run(&TimeGrid::new(0.0, 10.0, 1.0).unwrap()).unwrap();
        let s = traj.series("S").unwrap();
        // closed-form Euler recurrence 100 * 0.9^10
        assert!((s[10] - 34.867844).abs() < 1e-6);
        assert!((s[10] - 100.0 * 0.9f64.powi(10)).abs() < 1e-10);
    }

    #[test]
    fn constant_inflow_accumulates() {
        let mut def = ModelDefinition::default();
        def.stock("S", 0.0).flow("in", None, Some("S"), "3");
        let m = compile_model(&def).unwrap();
        let traj = m.run(&TimeGrid::new(0.0, 5.0, 1.0).unwrap()).unwrap();
        assert_eq!(traj.series("S").unwrap()[5], 15.0);
    }

    #[test]
    fn non_finite_values_abort_with_location() {
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0)
            .aux("bad", "ln(S - time)")
            .flow("f", None, Some("S"), "bad");
        let m = compile_model(&def).unwrap();
        match m.run(&TimeGrid::new(0.0, 5.0, 1.0).unwrap()) {
            Err(EngineError::NonFiniteValue { variable, time, .. }) => {
                assert_eq!(variable, "bad");
                assert_eq!(time, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(m.step(&[f64::NAN], 0.0, 1.0).is_err());
    }

    #[test]
    fn builtins_evaluate() {
        let mut def = ModelDefinition::default();
        def.param("p", 4.0)
            .table("g", vec![[0.0, 0.0], [10.0, 100.0]])
            .aux(
                "a",
                "min(p, 2, 3) + max(1, p) + sqrt(p) + abs(-1) + exp(0) + ln(1)",
            )
            .aux(
                "b",
                "if(p > 3, 10, 20) + (p == 4) + lookup(g, 5) + 2 ^ 3 + time + dt",
            );
        let m = compile_model(&def).unwrap();
        let traj = m.run(&TimeGrid::new(0.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(traj.series("a").unwrap()[0], 2.0 + 4.0 + 2.0 + 1.0 + 1.0);
        assert_eq!(
            traj.series("b").unwrap()[1],
            10.0 + 1.0 + 50.0 + 8.0 + 0.5 + 0.5
        );
    }

    #[test]
    fn parameters_can_be_replaced_without_recompiling() {
        let m = compile_model(&decay()).unwrap();
        let m2 = m.with_parameters([("k", 0.5)]).unwrap();
        assert_eq!(m.parameter("k"), Some(0.1));
        assert_eq!(m2.parameter("k"), Some(0.5));
        assert!(m.with_parameters([("nope", 1.0)]).is_err());
        let grid = TimeGrid::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(m2.run(&grid).unwrap().series("S").unwrap()[1], 50.0);
    }

    #[test]
    fn initial_expressions_use_parameters() {
        let mut def = ModelDefinition::default();
        def.param("p", 4.0)
            .table("g", vec![[0.0, 0.0], [10.0, 100.0]])
            .stock("S", "p * lookup(g, 1)");
        let m = compile_model(&def).unwrap();
        assert_eq!(m.initial_state(0.0, 1.0).unwrap(), vec![40.0]);
    }
}
