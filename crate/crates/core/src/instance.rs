//! Finite magmas, real-valued functions on them, and the JSON instance format.

use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite set `{0, .., m-1}` with a total binary operation given by its table.
///
/// No algebraic law is assumed: the operation need not be associative,
/// commutative or idempotent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Magma {
    table: Vec<Vec<usize>>,
}

impl Magma {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let m = table.len();
        if m == 0 {
            return Err(Error::Parse {
                location: "op".into(),
                message: "magma must have at least one element".into(),
            });
        }
        for (x, row) in table.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Parse {
                    location: format!("op[{x}]"),
                    message: format!("ragged table: row has {} entries, expected {m}", row.len()),
                });
            }
            if let Some((y, &z)) = row.iter().enumerate().find(|(_, &z)| z >= m) {
                return Err(Error::Parse {
                    location: format!("op[{x}][{y}]"),
                    message: format!("index out of range: {z} >= {m}"),
                });
            }
        }
        Ok(Self { table })
    }

    /// Builds a magma from an operation on indices.
    pub fn from_fn(m: usize, op: impl Fn(usize, usize) -> usize) -> Result<Self> {
        Self::new((0..m).map(|x| (0..m).map(|y| op(x, y)).collect()).collect())
    }

    /// `Z_m` under addition mod m, an abelian group.
    pub fn cyclic_addition(m: usize) -> Self {
        Self::from_fn(m, |x, y| (x + y) % m).expect("closed by construction")
    }

    /// `{0, .., m-1}` under `max`, an idempotent commutative semigroup.
    pub fn max_semilattice(m: usize) -> Self {
        Self::from_fn(m, |x, y| x.max(y)).expect("closed by construction")
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn op(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.size()).all(|x| (0..x).all(|y| self.op(x, y) == self.op(y, x)))
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.size()).filter(|&x| self.op(x, x) == x).collect()
    }
}

/// The positive constants `p`, `q` in `f(x∘y) <= p f(x) + q f(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConvexityParams<T> {
    p: T,
    q: T,
}

impl<T: Scalar> ConvexityParams<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::NonPositive { name: "p", value: p.to_canonical() });
        }
        if !q.is_positive() {
            return Err(Error::NonPositive { name: "q", value: q.to_canonical() });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    /// `p / (p + q)`, the ratio of the base operation.
    pub fn base_ratio(&self) -> T {
        self.p.clone() / (self.p.clone() + self.q.clone())
    }
}

/// A function `X -> T` on a finite magma, stored by value per element index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Function<T> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Scalar> Function<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Self {
        Self { name: name.into(), values }
    }

    pub fn from_ints(name: impl Into<String>, values: &[i64]) -> Self {
        Self::new(name, values.iter().map(|&v| T::from_int(v)).collect())
    }

    pub fn constant(name: impl Into<String>, m: usize, value: T) -> Self {
        Self::new(name, vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize) -> &T {
        &self.values[x]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Checks that every function in `fns` has length `m`.
pub(crate) fn check_lengths<T>(fns: &[Function<T>], m: usize, context: &'static str) -> Result<()> {
    match fns.iter().find(|f| f.values.len() != m) {
        Some(f) => Err(Error::SizeMismatch { context, expected: m, found: f.values.len() }),
        None => Ok(()),
    }
}

/// Common length of a nonempty family.
pub(crate) fn family_size<T>(fns: &[Function<T>], context: &'static str) -> Result<usize> {
    let m = fns.first().ok_or(Error::EmptyFamily)?.values.len();
    check_lengths(fns, m, context)?;
    Ok(m)
}

/// A magma, convexity constants and a family of functions on the magma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance<T> {
    pub magma: Magma,
    /// Optional display names; all internal references are indices.
    pub elements: Option<Vec<String>>,
    pub params: ConvexityParams<T>,
    pub functions: Vec<Function<T>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(magma: Magma, params: ConvexityParams<T>, functions: Vec<Function<T>>) -> Result<Self> {
        check_lengths(&functions, magma.size(), "instance functions")?;
        Ok(Self { magma, elements: None, params, functions })
    }

    pub fn with_elements(mut self, names: Vec<String>) -> Result<Self> {
        validate_elements(&names, self.magma.size())?;
        self.elements = Some(names);
        Ok(self)
    }

    pub fn function(&self, name: &str) -> Result<(usize, &Function<T>)> {
        self.functions
            .iter()
            .enumerate()
            .find(|(_, f)| f.name == name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    /// Resolves an element given by index or by its alias.
    pub fn element_index(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.elements.as_ref().and_then(|names| names.iter().position(|n| n == key)) {
            return Ok(i);
        }
        let index: usize = key.trim().parse().map_err(|_| Error::Parse {
            location: "element".into(),
            message: format!("unknown element {key:?}"),
        })?;
        if index >= self.magma.size() {
            return Err(Error::IndexOutOfRange { index, size: self.magma.size() });
        }
        Ok(index)
    }

    pub fn element_name(&self, x: usize) -> String {
        match &self.elements {
            Some(names) => names[x].clone(),
            None => x.to_string(),
        }
    }
}

fn validate_elements(names: &[String], m: usize) -> Result<()> {
    if names.len() != m {
        return Err(Error::Parse {
            location: "elements".into(),
            message: format!("expected {m} names, found {}", names.len()),
        });
    }
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(Error::Parse {
                location: format!("elements[{i}]"),
                message: format!("duplicate element name {name:?}"),
            });
        }
    }
    Ok(())
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

fn parse_rational<T: Scalar>(value: &Value, location: String) -> Result<T> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        other => return Err(parse_err(location, format!("expected rational string, found {other}"))),
    };
    T::parse_scalar(&text).ok_or_else(|| parse_err(location, format!("malformed rational {text:?}")))
}

fn parse_index(value: &Value, location: String) -> Result<usize> {
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| parse_err(location, format!("expected nonnegative integer, found {value}")))
}

/// Parses an instance document.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    instance_from_value(&doc)
}

pub fn instance_from_value<T: Scalar>(doc: &Value) -> Result<Instance<T>> {
    let obj = doc.as_object().ok_or_else(|| parse_err("$", "expected an object"))?;
    let field = |key: &str| obj.get(key).ok_or_else(|| parse_err(key, "missing field"));

    let m = parse_index(field("m")?, "m".into())?;
    if m == 0 {
        return Err(parse_err("m", "must be at least 1"));
    }

    let rows = field("op")?.as_array().ok_or_else(|| parse_err("op", "expected an array of rows"))?;
    if rows.len() != m {
        return Err(parse_err("op", format!("ragged table: {} rows, expected {m}", rows.len())));
    }
    let mut table = Vec::with_capacity(m);
    for (x, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| parse_err(format!("op[{x}]"), "expected an array"))?;
        let row = row
            .iter()
            .enumerate()
            .map(|(y, v)| parse_index(v, format!("op[{x}][{y}]")))
            .collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    let magma = Magma::new(table)?;

    let p = parse_rational(field("p")?, "p".into())?;
    let q = parse_rational(field("q")?, "q".into())?;
    let params = ConvexityParams::new(p, q).map_err(|e| match e {
        Error::NonPositive { name, value } => parse_err(name, format!("must be positive, got {value}")),
        other => other,
    })?;

    let list = field("functions")?
        .as_array()
        .ok_or_else(|| parse_err("functions", "expected an array"))?;
    let mut functions = Vec::with_capacity(list.len());
    for (i, entry) in list.iter().enumerate() {
        let loc = format!("functions[{i}]");
        let name = entry
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("{loc}.name"), "expected a string"))?;
        let values = entry
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err(format!("{loc}.values"), "expected an array"))?;
        if values.len() != m {
            return Err(parse_err(
                format!("{loc}.values"),
                format!("expected {m} values, found {}", values.len()),
            ));
        }
        let values = values
            .iter()
            .enumerate()
            .map(|(x, v)| parse_rational(v, format!("{loc}.values[{x}]")))
            .collect::<Result<Vec<T>>>()?;
        functions.push(Function::new(name, values));
    }

    let mut instance = Instance::new(magma, params, functions)?;
    if let Some(names) = obj.get("elements") {
        let names = names
            .as_array()
            .ok_or_else(|| parse_err("elements", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| parse_err(format!("elements[{i}]"), "expected a string"))
            })
            .collect::<Result<Vec<_>>>()?;
        instance = instance.with_elements(names)?;
    }
    Ok(instance)
}

fn json_str(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn rational_list<T: Scalar>(values: &[T]) -> String {
    let items: Vec<String> = values.iter().map(|v| json_str(&v.to_canonical())).collect();
    format!("[{}]", items.join(", "))
}

/// Writes the canonical document for `inst`. Parsing the output yields `inst` again.
pub fn serialize_instance<T: Scalar>(inst: &Instance<T>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"m\": {},", inst.magma.size());
    if let Some(names) = &inst.elements {
        let items: Vec<String> = names.iter().map(|n| json_str(n)).collect();
        let _ = writeln!(out, "  \"elements\": [{}],", items.join(", "));
    }
    out.push_str("  \"op\": [\n");
    let rows = inst.magma.table();
    for (x, row) in rows.iter().enumerate() {
        let items: Vec<String> = row.iter().map(usize::to_string).collect();
        let sep = if x + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", items.join(", "));
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"p\": {},", json_str(&inst.params.p().to_canonical()));
    let _ = writeln!(out, "  \"q\": {},", json_str(&inst.params.q().to_canonical()));
    if inst.functions.is_empty() {
        out.push_str("  \"functions\": []\n");
    } else {
        out.push_str("  \"functions\": [\n");
        for (i, f) in inst.functions.iter().enumerate() {
            let sep = if i + 1 < inst.functions.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {{\"name\": {}, \"values\": {}}}{sep}",
                json_str(&f.name),
                rational_list(&f.values)
            );
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out
}
