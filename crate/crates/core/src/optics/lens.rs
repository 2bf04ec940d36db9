//! State spaces as named-field records, with field lenses, expressions and
//! simultaneous substitutions over them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Kind, OpticsError, Value};

/// Field names and kinds of a state space, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Schema {
    fields: Vec<(Arc<str>, Kind)>,
}

impl Schema {
    pub fn new(fields: impl IntoIterator<Item = (impl Into<Arc<str>>, Kind)>) -> Result<Self, OpticsError> {
        let mut out: Vec<(Arc<str>, Kind)> = Vec::new();
        for (name, kind) in fields {
            let name = name.into();
            if out.iter().any(|(n, _)| *n == name) {
                return Err(OpticsError::DuplicateField(name.to_string()));
            }
            out.push((name, kind));
        }
        Ok(Schema { fields: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(n, _)| &**n == name)
    }

    pub fn field_names(&self) -> impl Iterator<Item = &Arc<str>> {
        self.fields.iter().map(|(n, _)| n)
    }

    pub fn kind_of(&self, name: &str) -> Option<&Kind> {
        self.fields.iter().find(|(n, _)| &**n == name).map(|(_, k)| k)
    }
}

/// A record assigning a value to every field of its schema.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSpace {
    schema: Arc<Schema>,
    values: Vec<Value>,
}

impl StateSpace {
    pub fn new(schema: Arc<Schema>, values: Vec<Value>) -> Result<Self, OpticsError> {
        if values.len() != schema.len() {
            return Err(OpticsError::SchemaMismatch(format!(
                "expected {} field values, got {}",
                schema.len(),
                values.len()
            )));
        }
        for ((name, kind), v) in schema.fields.iter().zip(&values) {
            if !kind.matches(v) {
                return Err(OpticsError::KindMismatch {
                    context: format!("field {name}"),
                    expected: kind.clone(),
                    found: v.clone(),
                });
            }
        }
        Ok(StateSpace { schema, values })
    }

    /// Builds a state from `(field, value)` pairs in any order.
    pub fn from_fields<'a>(
        schema: Arc<Schema>,
        fields: impl IntoIterator<Item = (&'a str, Value)>,
    ) -> Result<Self, OpticsError> {
        let mut values: Vec<Option<Value>> = vec![None; schema.len()];
        for (name, v) in fields {
            let i = schema
                .index_of(name)
                .ok_or_else(|| OpticsError::UndeclaredField(name.to_string()))?;
            values[i] = Some(v);
        }
        let values = values
            .into_iter()
            .zip(schema.field_names())
            .map(|(v, n)| v.ok_or_else(|| OpticsError::SchemaMismatch(format!("field {n} has no value"))))
            .collect::<Result<_, _>>()?;
        StateSpace::new(schema, values)
    }

    /// The state of the empty schema.
    pub fn unit() -> Self {
        StateSpace {
            schema: Arc::new(Schema::empty()),
            values: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, field: &str) -> Result<&Value, OpticsError> {
        self.schema
            .index_of(field)
            .map(|i| &self.values[i])
            .ok_or_else(|| OpticsError::UndeclaredField(field.to_string()))
    }

    pub fn set(&self, field: &str, v: Value) -> Result<StateSpace, OpticsError> {
        let i = self
            .schema
            .index_of(field)
            .ok_or_else(|| OpticsError::UndeclaredField(field.to_string()))?;
        let kind = &self.schema.fields[i].1;
        if !kind.matches(&v) {
            return Err(OpticsError::KindMismatch {
                context: format!("field {field}"),
                expected: kind.clone(),
                found: v,
            });
        }
        let mut values = self.values.clone();
        values[i] = v;
        Ok(StateSpace {
            schema: self.schema.clone(),
            values,
        })
    }

    fn same_schema(&self, other: &StateSpace) -> Result<(), OpticsError> {
        if Arc::ptr_eq(&self.schema, &other.schema) || self.schema == other.schema {
            Ok(())
        } else {
            Err(OpticsError::SchemaMismatch("states have different schemas".into()))
        }
    }

    /// The state as a value: a list of `(name, value)` pairs.
    pub fn to_value(&self) -> Value {
        Value::List(
            self.schema
                .field_names()
                .zip(&self.values)
                .map(|(n, v)| Value::pair(Value::Str(n.to_string()), v.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, v)) in self.schema.field_names().zip(&self.values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}: {v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A state-variable lens described by the fields it touches.
///
/// A single-field lens views that field's value; a composite lens (a name
/// set) views the list of its fields' values in the order given.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lens {
    fields: Vec<Arc<str>>,
    composite: bool,
}

impl Lens {
    pub fn field(name: impl Into<Arc<str>>) -> Lens {
        Lens {
            fields: vec![name.into()],
            composite: false,
        }
    }

    /// A name-set lens over several fields. Repeated names are dropped.
    pub fn fields(names: impl IntoIterator<Item = impl Into<Arc<str>>>) -> Lens {
        let mut fields: Vec<Arc<str>> = Vec::new();
        for n in names {
            let n = n.into();
            if !fields.contains(&n) {
                fields.push(n);
            }
        }
        Lens {
            fields,
            composite: true,
        }
    }

    /// The lens with empty footprint.
    pub fn empty() -> Lens {
        Lens::fields(Vec::<Arc<str>>::new())
    }

    /// Composite lens whose footprint is the union of both footprints.
    pub fn union(&self, other: &Lens) -> Lens {
        Lens::fields(self.fields.iter().chain(&other.fields).cloned())
    }

    pub fn footprint(&self) -> BTreeSet<Arc<str>> {
        self.fields.iter().cloned().collect()
    }

    pub fn field_names(&self) -> &[Arc<str>] {
        &self.fields
    }

    pub fn get(&self, s: &StateSpace) -> Result<Value, OpticsError> {
        if self.composite {
            Ok(Value::List(
                self.fields
                    .iter()
                    .map(|f| s.get(f).cloned())
                    .collect::<Result<_, _>>()?,
            ))
        } else {
            s.get(&self.fields[0]).cloned()
        }
    }

    pub fn put(&self, s: &StateSpace, v: Value) -> Result<StateSpace, OpticsError> {
        if !self.composite {
            return s.set(&self.fields[0], v);
        }
        match v {
            Value::List(xs) if xs.len() == self.fields.len() => {
                let mut out = s.clone();
                for (f, x) in self.fields.iter().zip(xs) {
                    out = out.set(f, x)?;
                }
                Ok(out)
            }
            other => Err(OpticsError::KindMismatch {
                context: format!("name set {{{}}}", self.fields.join(", ")),
                expected: Kind::list(Kind::Any),
                found: other,
            }),
        }
    }
}

/// `x ▷◁ y`: the lenses touch disjoint fields.
pub fn lens_indep(x: &Lens, y: &Lens) -> bool {
    x.footprint().is_disjoint(&y.footprint())
}

/// `x ♯ e`: the expression does not read any field of the lens.
pub fn unrestricted(x: &Lens, e: &Expr) -> bool {
    x.footprint().is_disjoint(e.reads())
}

/// Lens override: fields of `region` come from `s2`, all others from `s1`.
pub fn lens_override(s1: &StateSpace, s2: &StateSpace, region: &Lens) -> Result<StateSpace, OpticsError> {
    s1.same_schema(s2)?;
    let mut out = s1.clone();
    for f in region.field_names() {
        out = out.set(f, s2.get(f)?.clone())?;
    }
    Ok(out)
}

type EvalFn = dyn Fn(&StateSpace) -> Result<Value, OpticsError> + Send + Sync;

/// An expression over the state, with the set of fields it may read.
#[derive(Clone)]
pub struct Expr {
    eval: Arc<EvalFn>,
    reads: BTreeSet<Arc<str>>,
}

impl Expr {
    pub fn new(
        reads: impl IntoIterator<Item = impl Into<Arc<str>>>,
        eval: impl Fn(&StateSpace) -> Result<Value, OpticsError> + Send + Sync + 'static,
    ) -> Expr {
        Expr {
            eval: Arc::new(eval),
            reads: reads.into_iter().map(Into::into).collect(),
        }
    }

    pub fn constant(v: Value) -> Expr {
        Expr::new(Vec::<Arc<str>>::new(), move |_| Ok(v.clone()))
    }

    /// Reads a single field.
    pub fn var(name: impl Into<Arc<str>>) -> Expr {
        let name: Arc<str> = name.into();
        let n = name.clone();
        Expr::new([name], move |s| s.get(&n).cloned())
    }

    /// Applies `f` to the value of `self`.
    pub fn map(&self, f: impl Fn(Value) -> Result<Value, OpticsError> + Send + Sync + 'static) -> Expr {
        let inner = self.eval.clone();
        Expr {
            eval: Arc::new(move |s| f(inner(s)?)),
            reads: self.reads.clone(),
        }
    }

    /// Combines two expressions; the footprint is the union.
    pub fn zip_with(
        &self,
        other: &Expr,
        f: impl Fn(Value, Value) -> Result<Value, OpticsError> + Send + Sync + 'static,
    ) -> Expr {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Expr {
            eval: Arc::new(move |s| f(a(s)?, b(s)?)),
            reads: self.reads.union(&other.reads).cloned().collect(),
        }
    }

    pub fn eval(&self, s: &StateSpace) -> Result<Value, OpticsError> {
        (self.eval)(s)
    }

    pub fn reads(&self) -> &BTreeSet<Arc<str>> {
        &self.reads
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expr")
            .field("reads", &self.reads)
            .finish_non_exhaustive()
    }
}

/// A simultaneous substitution `[x₁ ↝ e₁, x₂ ↝ e₂, …]`.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    maplets: Vec<(Lens, Expr)>,
}

impl Subst {
    /// The identity substitution.
    pub fn id() -> Subst {
        Subst::default()
    }

    pub fn assign(x: Lens, e: Expr) -> Subst {
        Subst { maplets: vec![(x, e)] }
    }

    pub fn with(mut self, x: Lens, e: Expr) -> Subst {
        self.maplets.push((x, e));
        self
    }

    pub fn maplets(&self) -> &[(Lens, Expr)] {
        &self.maplets
    }

    /// Every expression reads the input state; the puts are then applied in
    /// order.
    pub fn apply(&self, s: &StateSpace) -> Result<StateSpace, OpticsError> {
        let values = self
            .maplets
            .iter()
            .map(|(_, e)| e.eval(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = s.clone();
        for ((x, _), v) in self.maplets.iter().zip(values) {
            out = x.put(&out, v)?;
        }
        Ok(out)
    }

    /// `ρ ∘ σ`: apply `sigma` first, then `self`. The result assigns every
    /// field either substitution writes.
    pub fn compose(&self, sigma: &Subst) -> Subst {
        let mut fields: Vec<Arc<str>> = Vec::new();
        let mut reads = BTreeSet::new();
        for (x, e) in sigma.maplets.iter().chain(&self.maplets) {
            for f in x.field_names() {
                if !fields.contains(f) {
                    fields.push(f.clone());
                }
            }
            reads.extend(e.reads.iter().cloned());
        }
        let rho = self.clone();
        let sigma = sigma.clone();
        let both = Arc::new(move |s: &StateSpace| rho.apply(&sigma.apply(s)?));
        let maplets = fields
            .into_iter()
            .map(|f| {
                let run = both.clone();
                let name = f.clone();
                let e = Expr {
                    eval: Arc::new(move |s| run(s)?.get(&name).cloned()),
                    reads: reads.clone(),
                };
                (Lens::field(f), e)
            })
            .collect();
        Subst { maplets }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn schema() -> Arc<Schema> {
        Arc::new(Schema::new([("x", Kind::Int), ("y", Kind::Int), ("z", Kind::Int)]).unwrap())
    }

    fn state(x: i64, y: i64, z: i64) -> StateSpace {
        StateSpace::new(schema(), vec![x.into(), y.into(), z.into()]).unwrap()
    }

    fn plus(e: &Expr, k: i64) -> Expr {
        e.map(move |v| Ok(Value::Int(v.as_int().unwrap() + k)))
    }

    #[test]
    fn independence_by_footprint() {
        let (buf, ctr) = (Lens::field("buf"), Lens::field("ctr"));
        assert!(lens_indep(&buf, &ctr));
        assert!(!lens_indep(&buf, &buf));
        assert!(lens_indep(&Lens::empty(), &buf));
        assert!(!lens_indep(&Lens::fields(["a", "buf"]), &buf));
    }

    #[test]
    fn unrestriction_by_footprint() {
        let (x, y) = (Lens::field("x"), Lens::field("y"));
        assert!(unrestricted(&x, &plus(&Expr::var("y"), 1)));
        assert!(!unrestricted(&x, &plus(&Expr::var("x"), 1)));
        assert!(unrestricted(&y, &Expr::constant(Value::Int(3))));
    }

    #[test]
    fn substitution_reads_pre_state() {
        let s = state(0, 9, 5);
        let sigma = Subst::assign(Lens::field("x"), Expr::constant(1.into())).with(Lens::field("y"), Expr::var("x"));
        assert_eq!(sigma.apply(&s).unwrap(), state(1, 0, 5));
        assert_eq!(Subst::id().apply(&s).unwrap(), s);
    }

    #[test]
    fn override_selects_region() {
        let schema = Arc::new(Schema::new([("a", Kind::Int), ("b", Kind::Int)]).unwrap());
        let s1 = StateSpace::new(schema.clone(), vec![1.into(), 2.into()]).unwrap();
        let s2 = StateSpace::new(schema.clone(), vec![9.into(), 8.into()]).unwrap();
        assert_eq!(lens_override(&s1, &s2, &Lens::empty()).unwrap(), s1);
        assert_eq!(lens_override(&s1, &s2, &Lens::fields(["a", "b"])).unwrap(), s2);
        assert_eq!(
            lens_override(&s1, &s2, &Lens::field("a")).unwrap().values(),
            &[Value::Int(9), Value::Int(2)]
        );
        let other = StateSpace::unit();
        assert!(matches!(
            lens_override(&s1, &other, &Lens::empty()),
            Err(OpticsError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn schema_errors() {
        let s = state(1, 2, 3);
        assert!(matches!(s.get("w"), Err(OpticsError::UndeclaredField(_))));
        assert!(s.set("x", Value::Bool(true)).is_err());
        assert!(Lens::field("w").put(&s, 1.into()).is_err());
        assert!(Lens::fields(["x", "y"]).put(&s, 1.into()).is_err());
        assert!(Schema::new([("x", Kind::Int), ("x", Kind::Int)]).is_err());
        assert!(StateSpace::new(schema(), vec![]).is_err());
    }

    fn arb_state() -> impl Strategy<Value = StateSpace> {
        (-50i64..50, -50i64..50, -50i64..50).prop_map(|(x, y, z)| state(x, y, z))
    }

    fn arb_lens() -> impl Strategy<Value = Lens> {
        prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Lens::field),
            prop::sample::subsequence(vec!["x", "y", "z"], 0..=3).prop_map(Lens::fields),
        ]
    }

    fn arb_subst() -> impl Strategy<Value = Subst> {
        let maplet = (
            prop::sample::select(vec!["x", "y", "z"]),
            prop::sample::select(vec!["x", "y", "z"]),
            -3i64..3,
        );
        prop::collection::vec(maplet, 0..3).prop_map(|ms| {
            let mut seen = Vec::new();
            let mut sigma = Subst::id();
            for (target, src, k) in ms {
                if !seen.contains(&target) {
                    seen.push(target);
                    sigma = sigma.with(Lens::field(target), plus(&Expr::var(src), k));
                }
            }
            sigma
        })
    }

    proptest! {
        #[test]
        fn lens_laws(s in arb_state(), l in arb_lens(), a in -9i64..9, b in -9i64..9) {
            let val = |k: i64| if l.composite {
                Value::List(l.field_names().iter().map(|_| Value::Int(k)).collect())
            } else {
                Value::Int(k)
            };
            let put = l.put(&s, val(a)).unwrap();
            prop_assert_eq!(l.get(&put).unwrap(), val(a));
            prop_assert_eq!(l.put(&s, l.get(&s).unwrap()).unwrap(), s.clone());
            prop_assert_eq!(l.put(&put, val(b)).unwrap(), l.put(&s, val(b)).unwrap());
            for f in ["x", "y", "z"] {
                if !l.footprint().contains(f) {
                    prop_assert_eq!(put.get(f).unwrap(), s.get(f).unwrap());
                }
            }
        }

        #[test]
        fn independent_puts_commute(s in arb_state(), a in -9i64..9, b in -9i64..9) {
            let (x, y) = (Lens::field("x"), Lens::field("z"));
            prop_assume!(lens_indep(&x, &y));
            let one = x.put(&y.put(&s, b.into()).unwrap(), a.into()).unwrap();
            let two = y.put(&x.put(&s, a.into()).unwrap(), b.into()).unwrap();
            prop_assert_eq!(one, two);
        }

        #[test]
        fn unrestricted_expr_ignores_puts(s in arb_state(), a in -9i64..9, k in -3i64..3) {
            let x = Lens::field("x");
            let e = plus(&Expr::var("y"), k).zip_with(&Expr::var("z"), |p, q| {
                Ok(Value::Int(p.as_int().unwrap() * q.as_int().unwrap()))
            });
            prop_assert!(unrestricted(&x, &e));
            prop_assert_eq!(e.eval(&x.put(&s, a.into()).unwrap()).unwrap(), e.eval(&s).unwrap());
        }

        #[test]
        fn composition_is_function_composition(s in arb_state(), rho in arb_subst(), sigma in arb_subst()) {
            let composed = rho.compose(&sigma);
            let expected = rho.apply(&sigma.apply(&s).unwrap()).unwrap();
            prop_assert_eq!(composed.apply(&s).unwrap(), expected);
        }
    }
}
