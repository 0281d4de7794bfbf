use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::cosine;

/// Element-wise max over columns with the winning column per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPool {
    pub values: Array1<f64>,
    /// Column index of the maximum per row; first index on ties.
    pub argmax: Vec<usize>,
}

fn pool_over(m: ArrayView2<'_, f64>, columns: &[usize]) -> MaxPool {
    let d = m.nrows();
    let first = columns[0];
    let mut values = m.column(first).to_owned();
    let mut argmax = vec![first; d];
    for &c in &columns[1..] {
        for j in 0..d {
            let v = m[[j, c]];
            if v > values[j] {
                values[j] = v;
                argmax[j] = c;
            }
        }
    }
    MaxPool { values, argmax }
}

pub fn max_pool_forward(m: ArrayView2<'_, f64>) -> MaxPool {
    assert!(m.ncols() >= 1, "max-pooling needs at least one column");
    let all: Vec<usize> = (0..m.ncols()).collect();
    pool_over(m, &all)
}

pub fn max_pool_columns(m: ArrayView2<'_, f64>) -> Array1<f64> {
    max_pool_forward(m).values
}

/// Routes `upstream[j]` to column `argmax[j]` of an `d × n_cols` gradient.
pub fn max_pool_backward(
    argmax: &[usize],
    upstream: ArrayView1<'_, f64>,
    n_cols: usize,
) -> Array2<f64> {
    let mut g = Array2::zeros((argmax.len(), n_cols));
    pool_backward(argmax, upstream, &mut g);
    g
}

/// Accumulating form of [`max_pool_backward`].
pub fn pool_backward(argmax: &[usize], upstream: ArrayView1<'_, f64>, grad: &mut Array2<f64>) {
    assert_eq!(
        argmax.len(),
        upstream.len(),
        "upstream gradient length mismatch"
    );
    for (j, &c) in argmax.iter().enumerate() {
        grad[[j, c]] += upstream[j];
    }
}

/// Result of top-k attention pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionPool {
    pub pooled: Array1<f64>,
    /// Cosine of the query with every item.
    pub weights: Vec<f64>,
    /// Indices of the chosen items, ascending.
    pub selected: Vec<usize>,
    /// Item index supplying each pooled component.
    pub argmax: Vec<usize>,
}

/// Selects the `min(k, n)` items (columns) most similar to `query` and
/// max-pools over them. Ties in weight prefer the lower index. The weights
/// only choose items; they do not scale them, and no gradient flows into
/// the query through this operation.
pub fn attention_pool(
    query: ArrayView1<'_, f64>,
    items: ArrayView2<'_, f64>,
    k: usize,
) -> AttentionPool {
    let n = items.ncols();
    assert!(n >= 1, "attention pooling needs at least one item");
    assert!(k >= 1, "k must be at least 1");
    assert_eq!(
        query.len(),
        items.nrows(),
        "query and item dimensions differ"
    );
    let weights: Vec<f64> = items
        .columns()
        .into_iter()
        .map(|c| cosine(query, c))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut selected = order[..k.min(n)].to_vec();
    selected.sort_unstable();
    let MaxPool { values, argmax } = pool_over(items, &selected);
    AttentionPool {
        pooled: values,
        weights,
        selected,
        argmax,
    }
}
