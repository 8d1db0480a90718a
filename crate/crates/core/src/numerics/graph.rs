//! Recorded computation graph with reverse-mode differentiation.
//!
//! Every value is a 2-D matrix. Operations append a node holding the forward
//! value and a description of how to route gradients back to its parents;
//! parents always precede children, so [`Graph::backward`] is a single reverse
//! sweep.

use std::collections::HashMap;

use super::tensor::{gemm, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named parameter tensors, in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
    index: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::contract(format!("parameter {name:?} registered twice")));
        }
        let id = ParamId(self.values.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.values.push(value);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.id(name).map(|id| self.get(id))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (n, v))| (ParamId(i), n.as_str(), v))
    }

    /// Total number of scalar parameters.
    pub fn total_size(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }
}

/// Per-parameter gradients, zero for parameters the loss does not reach.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    grads: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(params: &ParamStore) -> Self {
        Gradients {
            grads: params.values.iter().map(|t| Tensor::zeros(t.shape())).collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.grads[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.grads.iter().enumerate().map(|(i, g)| (ParamId(i), g))
    }

    pub fn global_norm(&self) -> f64 {
        self.grads.iter().map(Tensor::sq_norm).sum::<f64>().sqrt()
    }

    pub fn check_finite(&self, params: &ParamStore) -> Result<()> {
        for (id, g) in self.iter() {
            g.check_finite(&format!("grad {}", params.name(id)))?;
        }
        Ok(())
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Node, Node),
    Add(Node, Node),
    AddRow(Node, Node),
    Mul(Node, Node),
    Scale(Node, f64),
    Sigmoid(Node),
    Tanh(Node),
    /// Elementwise map with its derivative evaluated at the input.
    Map(Node, Vec<f64>),
    ConcatCols(Vec<Node>),
    ConcatRows(Vec<Node>),
    SliceCols(Node, usize),
    SliceRows(Node, usize),
    Lookup(ParamId, Vec<usize>),
    Gather(Node, Vec<usize>),
    Sum(Node),
    SoftmaxXent {
        logits: Node,
        targets: Vec<usize>,
        weights: Vec<f64>,
        probs: Vec<f64>,
        /// Per-row contributions to the loss value.
        terms: Vec<f64>,
    },
}

struct NodeData {
    value: Tensor,
    op: Op,
}

pub struct Graph<'p> {
    params: &'p ParamStore,
    nodes: Vec<NodeData>,
    param_nodes: HashMap<ParamId, Node>,
}

fn dims(t: &Tensor) -> (usize, usize) {
    (t.rows(), t.cols())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
            param_nodes: HashMap::new(),
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Node {
        self.nodes.push(NodeData { value, op });
        Node(self.nodes.len() - 1)
    }

    pub fn value(&self, n: Node) -> &Tensor {
        &self.nodes[n.0].value
    }

    pub fn scalar(&self, n: Node) -> f64 {
        self.value(n).data()[0]
    }

    /// A constant; gradients stop here.
    pub fn input(&mut self, value: Tensor) -> Node {
        let value = if value.shape().len() == 2 {
            value
        } else {
            let (r, c) = dims(&value);
            Tensor::matrix(r, c, value.into_data()).expect("reshape keeps size")
        };
        self.push(value, Op::Leaf)
    }

    pub fn param(&mut self, id: ParamId) -> Node {
        if let Some(&n) = self.param_nodes.get(&id) {
            return n;
        }
        let t = self.params.get(id);
        let value = Tensor::matrix(t.rows(), t.cols(), t.data().to_vec()).expect("param reshape");
        let n = self.push(value, Op::Param(id));
        self.param_nodes.insert(id, n);
        n
    }

    pub fn matmul(&mut self, a: Node, b: Node) -> Node {
        let (m, k) = dims(self.value(a));
        let (k2, n) = dims(self.value(b));
        assert_eq!(k, k2, "matmul inner dimensions {m}x{k} * {k2}x{n}");
        let mut out = vec![0.0; m * n];
        gemm(
            m,
            k,
            n,
            self.value(a).data(),
            false,
            self.value(b).data(),
            false,
            0.0,
            &mut out,
        );
        self.push(Tensor::matrix(m, n, out).unwrap(), Op::MatMul(a, b))
    }

    fn zip_with(&self, a: Node, b: Node, f: impl Fn(f64, f64) -> f64, what: &str) -> Tensor {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(dims(va), dims(vb), "{what} shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| f(*x, *y)).collect();
        Tensor::matrix(va.rows(), va.cols(), data).unwrap()
    }

    fn map_values(&self, a: Node, f: impl Fn(f64) -> f64) -> Tensor {
        let va = self.value(a);
        Tensor::matrix(va.rows(), va.cols(), va.data().iter().map(|&x| f(x)).collect()).unwrap()
    }

    pub fn add(&mut self, a: Node, b: Node) -> Node {
        let v = self.zip_with(a, b, |x, y| x + y, "add");
        self.push(v, Op::Add(a, b))
    }

    /// Adds the `1 x n` row `bias` to every row of `a`.
    pub fn add_row(&mut self, a: Node, bias: Node) -> Node {
        let (r, c) = dims(self.value(a));
        assert_eq!(dims(self.value(bias)), (1, c), "add_row bias shape");
        let mut out = self.value(a).data().to_vec();
        let b = self.value(bias).data();
        for row in out.chunks_mut(c.max(1)).take(r) {
            for (x, y) in row.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.push(Tensor::matrix(r, c, out).unwrap(), Op::AddRow(a, bias))
    }

    pub fn mul(&mut self, a: Node, b: Node) -> Node {
        let v = self.zip_with(a, b, |x, y| x * y, "mul");
        self.push(v, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Node, k: f64) -> Node {
        let v = self.map_values(a, |x| k * x);
        self.push(v, Op::Scale(a, k))
    }

    pub fn sigmoid(&mut self, a: Node) -> Node {
        let v = self.map_values(a, sigmoid);
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Node) -> Node {
        let v = self.map_values(a, f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    /// Elementwise `f` with user-supplied derivative `df`.
    pub fn map(&mut self, a: Node, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Node {
        let v = self.map_values(a, f);
        let d = self.value(a).data().iter().map(|&x| df(x)).collect();
        self.push(v, Op::Map(a, d))
    }

    pub fn concat_cols(&mut self, parts: &[Node]) -> Node {
        assert!(!parts.is_empty(), "concat of nothing");
        let r = self.value(parts[0]).rows();
        let widths: Vec<usize> = parts
            .iter()
            .map(|&p| {
                assert_eq!(self.value(p).rows(), r, "concat_cols row mismatch");
                self.value(p).cols()
            })
            .collect();
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(r * total);
        for i in 0..r {
            for &p in parts {
                out.extend_from_slice(self.value(p).row_slice(i));
            }
        }
        self.push(Tensor::matrix(r, total, out).unwrap(), Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Node]) -> Node {
        assert!(!parts.is_empty(), "concat of nothing");
        let c = self.value(parts[0]).cols();
        let mut out = Vec::new();
        let mut r = 0;
        for &p in parts {
            assert_eq!(self.value(p).cols(), c, "concat_rows column mismatch");
            out.extend_from_slice(self.value(p).data());
            r += self.value(p).rows();
        }
        self.push(Tensor::matrix(r, c, out).unwrap(), Op::ConcatRows(parts.to_vec()))
    }

    /// Columns `start..end`.
    pub fn slice_cols(&mut self, a: Node, start: usize, end: usize) -> Node {
        let (r, c) = dims(self.value(a));
        assert!(start <= end && end <= c, "slice_cols {start}..{end} of {c}");
        let mut out = Vec::with_capacity(r * (end - start));
        for i in 0..r {
            out.extend_from_slice(&self.value(a).row_slice(i)[start..end]);
        }
        self.push(Tensor::matrix(r, end - start, out).unwrap(), Op::SliceCols(a, start))
    }

    /// Rows `start..end`.
    pub fn slice_rows(&mut self, a: Node, start: usize, end: usize) -> Node {
        let (r, c) = dims(self.value(a));
        assert!(start <= end && end <= r, "slice_rows {start}..{end} of {r}");
        let out = self.value(a).data()[start * c..end * c].to_vec();
        self.push(Tensor::matrix(end - start, c, out).unwrap(), Op::SliceRows(a, start))
    }

    /// Rows of a parameter table, read in place.
    pub fn lookup(&mut self, table: ParamId, rows: &[usize]) -> Node {
        let t = self.params.get(table);
        let c = t.cols();
        let mut out = Vec::with_capacity(rows.len() * c);
        for &r in rows {
            assert!(r < t.rows(), "lookup row {r} of {}", t.rows());
            out.extend_from_slice(t.row_slice(r));
        }
        self.push(
            Tensor::matrix(rows.len(), c, out).unwrap(),
            Op::Lookup(table, rows.to_vec()),
        )
    }

    /// Rows of another node (repeats allowed).
    pub fn gather(&mut self, a: Node, rows: &[usize]) -> Node {
        let (r, c) = dims(self.value(a));
        let mut out = Vec::with_capacity(rows.len() * c);
        for &i in rows {
            assert!(i < r, "gather row {i} of {r}");
            out.extend_from_slice(self.value(a).row_slice(i));
        }
        self.push(
            Tensor::matrix(rows.len(), c, out).unwrap(),
            Op::Gather(a, rows.to_vec()),
        )
    }

    pub fn sum(&mut self, a: Node) -> Node {
        let s = self.value(a).sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    /// Weighted mean over rows of `-ln softmax(logits[i])[targets[i]]`.
    /// Rows with zero weight are ignored; an all-zero weight vector gives 0.
    pub fn softmax_cross_entropy(&mut self, logits: Node, targets: &[usize], weights: &[f64]) -> Node {
        let (r, c) = dims(self.value(logits));
        assert_eq!(targets.len(), r, "one target per row");
        assert_eq!(weights.len(), r, "one weight per row");
        let total: f64 = weights.iter().sum();
        let mut probs = Vec::with_capacity(r * c);
        let mut terms = vec![0.0; r];
        for i in 0..r {
            let row = self.value(logits).row_slice(i);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|&x| (x - max).exp()).sum();
            let lse = max + z.ln();
            assert!(targets[i] < c, "target {} out of range {c}", targets[i]);
            if weights[i] != 0.0 && total > 0.0 {
                terms[i] = weights[i] * (lse - row[targets[i]]) / total;
            }
            probs.extend(row.iter().map(|&x| (x - lse).exp()));
        }
        let loss = terms.iter().sum();
        self.push(
            Tensor::scalar(loss),
            Op::SoftmaxXent {
                logits,
                targets: targets.to_vec(),
                weights: weights.to_vec(),
                probs,
                terms,
            },
        )
    }

    /// The summands of a [`Graph::sum`] or [`Graph::softmax_cross_entropy`]
    /// node, whose value is their total.
    pub fn loss_terms(&self, n: Node) -> Option<&[f64]> {
        match &self.nodes[n.0].op {
            Op::SoftmaxXent { terms, .. } => Some(terms),
            Op::Sum(a) => Some(self.nodes[a.0].value.data()),
            _ => None,
        }
    }

    /// Gradients of the scalar `loss` with respect to every parameter.
    pub fn backward(&self, loss: Node) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(Error::Shape(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        self.value(loss).check_finite("loss")?;
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut pgrads = Gradients::zeros_like(self.params);
        grads[loss.0] = Some(Tensor::scalar(1.0));

        fn slot<'a>(grads: &'a mut [Option<Tensor>], nodes: &[NodeData], n: Node) -> &'a mut Tensor {
            grads[n.0].get_or_insert_with(|| {
                let v = &nodes[n.0].value;
                Tensor::zeros(&[v.rows(), v.cols()])
            })
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            let nodes = &self.nodes;
            match &node.op {
                Op::Leaf => {}
                Op::Param(id) => pgrads
                    .get_mut(*id)
                    .data_mut()
                    .iter_mut()
                    .zip(g.data())
                    .for_each(|(p, x)| *p += x),
                Op::MatMul(a, b) => {
                    let (m, k) = dims(&nodes[a.0].value);
                    let n = node.value.cols();
                    let bv = nodes[b.0].value.data();
                    let av = nodes[a.0].value.data();
                    gemm(
                        m,
                        n,
                        k,
                        g.data(),
                        false,
                        bv,
                        true,
                        1.0,
                        slot(&mut grads, nodes, *a).data_mut(),
                    );
                    gemm(
                        k,
                        m,
                        n,
                        av,
                        true,
                        g.data(),
                        false,
                        1.0,
                        slot(&mut grads, nodes, *b).data_mut(),
                    );
                }
                Op::Add(a, b) => {
                    slot(&mut grads, nodes, *a).add_assign(&g);
                    slot(&mut grads, nodes, *b).add_assign(&g);
                }
                Op::AddRow(a, bias) => {
                    slot(&mut grads, nodes, *a).add_assign(&g);
                    let c = g.cols();
                    let gb = slot(&mut grads, nodes, *bias).data_mut();
                    for row in g.data().chunks(c.max(1)) {
                        for (x, y) in gb.iter_mut().zip(row) {
                            *x += y;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (nodes[a.0].value.data(), nodes[b.0].value.data());
                    for (x, (gi, y)) in slot(&mut grads, nodes, *a)
                        .data_mut()
                        .iter_mut()
                        .zip(g.data().iter().zip(vb))
                    {
                        *x += gi * y;
                    }
                    for (x, (gi, y)) in slot(&mut grads, nodes, *b)
                        .data_mut()
                        .iter_mut()
                        .zip(g.data().iter().zip(va))
                    {
                        *x += gi * y;
                    }
                }
                Op::Scale(a, k) => {
                    for (x, gi) in slot(&mut grads, nodes, *a).data_mut().iter_mut().zip(g.data()) {
                        *x += k * gi;
                    }
                }
                Op::Sigmoid(a) => {
                    let y = node.value.data();
                    for (x, (gi, yi)) in slot(&mut grads, nodes, *a)
                        .data_mut()
                        .iter_mut()
                        .zip(g.data().iter().zip(y))
                    {
                        *x += gi * yi * (1.0 - yi);
                    }
                }
                Op::Tanh(a) => {
                    let y = node.value.data();
                    for (x, (gi, yi)) in slot(&mut grads, nodes, *a)
                        .data_mut()
                        .iter_mut()
                        .zip(g.data().iter().zip(y))
                    {
                        *x += gi * (1.0 - yi * yi);
                    }
                }
                Op::Map(a, d) => {
                    for (x, (gi, di)) in slot(&mut grads, nodes, *a)
                        .data_mut()
                        .iter_mut()
                        .zip(g.data().iter().zip(d))
                    {
                        *x += gi * di;
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let w = nodes[p.0].value.cols();
                        let gp = slot(&mut grads, nodes, *p);
                        for r in 0..g.rows() {
                            let src = &g.row_slice(r)[offset..offset + w];
                            for (x, y) in gp.row_slice_mut(r).iter_mut().zip(src) {
                                *x += y;
                            }
                        }
                        offset += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let c = g.cols();
                    let mut offset = 0;
                    for p in parts {
                        let n = nodes[p.0].value.len();
                        let gp = slot(&mut grads, nodes, *p);
                        for (x, y) in gp.data_mut().iter_mut().zip(&g.data()[offset..offset + n]) {
                            *x += y;
                        }
                        offset += n;
                        debug_assert_eq!(n % c.max(1), 0);
                    }
                }
                Op::SliceCols(a, start) => {
                    let w = g.cols();
                    let ga = slot(&mut grads, nodes, *a);
                    for r in 0..g.rows() {
                        for (x, y) in ga.row_slice_mut(r)[*start..*start + w].iter_mut().zip(g.row_slice(r)) {
                            *x += y;
                        }
                    }
                }
                Op::SliceRows(a, start) => {
                    let c = g.cols();
                    let ga = slot(&mut grads, nodes, *a);
                    for (x, y) in ga.data_mut()[start * c..start * c + g.len()].iter_mut().zip(g.data()) {
                        *x += y;
                    }
                }
                Op::Lookup(table, rows) => {
                    let gt = pgrads.get_mut(*table);
                    for (i, &r) in rows.iter().enumerate() {
                        for (x, y) in gt.row_slice_mut(r).iter_mut().zip(g.row_slice(i)) {
                            *x += y;
                        }
                    }
                }
                Op::Gather(a, rows) => {
                    let ga = slot(&mut grads, nodes, *a);
                    for (i, &r) in rows.iter().enumerate() {
                        for (x, y) in ga.row_slice_mut(r).iter_mut().zip(g.row_slice(i)) {
                            *x += y;
                        }
                    }
                }
                Op::Sum(a) => {
                    let s = g.data()[0];
                    for x in slot(&mut grads, nodes, *a).data_mut() {
                        *x += s;
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    targets,
                    weights,
                    probs,
                    ..
                } => {
                    let total: f64 = weights.iter().sum();
                    if total > 0.0 {
                        let up = g.data()[0] / total;
                        let gl = slot(&mut grads, nodes, *logits);
                        let c = gl.cols();
                        for (r, (&t, &w)) in targets.iter().zip(weights).enumerate() {
                            if w == 0.0 {
                                continue;
                            }
                            let k = up * w;
                            let row = gl.row_slice_mut(r);
                            for (j, x) in row.iter_mut().enumerate() {
                                let p = probs[r * c + j];
                                *x += k * (p - if j == t { 1.0 } else { 0.0 });
                            }
                        }
                    }
                }
            }
        }
        pgrads.check_finite(self.params)?;
        Ok(pgrads)
    }
}

/// Numerically stable softmax of a vector.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = logits.iter().position(|x| x.is_nan()) {
        return Err(Error::NonFinite(format!("softmax input [{i}] is NaN")));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite(format!("softmax input max is {max}")));
    }
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// `-ln softmax(logits)[target]`.
pub fn cross_entropy_loss(logits: &[f64], target: usize) -> Result<f64> {
    if target >= logits.len() {
        return Err(Error::contract(format!(
            "target {target} out of range for {} logits",
            logits.len()
        )));
    }
    if let Some(i) = logits.iter().position(|x| x.is_nan()) {
        return Err(Error::NonFinite(format!("logit [{i}] is NaN")));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    Ok((lse - logits[target]).max(0.0))
}
