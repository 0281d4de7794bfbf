use ndarray::{s, Array1, Array2, ArrayView2, Axis};

/// Wide convolution `tanh(W · c_i + b)` over windows of `width` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    /// `out_dim × (width · in_dim)`; block `k` of a row multiplies the
    /// `k`-th column of the window, oldest first.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub width: usize,
}

impl ConvLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, width: usize) -> Self {
        assert!(width >= 1, "filter width must be at least 1");
        Self {
            weight: Array2::zeros((out_dim, width * in_dim)),
            bias: Array1::zeros(out_dim),
            width,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols() / self.width
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    /// Number of output columns for an input of `s` columns.
    pub fn output_len(&self, s: usize) -> usize {
        s + self.width - 1
    }
}

/// Forward intermediates needed by the backward pass.
#[derive(Debug, Clone)]
pub struct ConvCache {
    /// Zero-padded window matrix, `(width · in_dim) × (s + width − 1)`.
    pub windows: Array2<f64>,
    /// Post-tanh activations, `out_dim × (s + width − 1)`.
    pub output: Array2<f64>,
    pub input_len: usize,
}

fn windows(input: ArrayView2<'_, f64>, width: usize) -> Array2<f64> {
    let (d, s) = input.dim();
    let n = s + width - 1;
    let mut out = Array2::zeros((width * d, n));
    for t in 0..n {
        for k in 0..width {
            // window t covers input positions t-width+1 ..= t
            let pos = t + k;
            if pos < width - 1 || pos - (width - 1) >= s {
                continue;
            }
            out.slice_mut(s![k * d..(k + 1) * d, t])
                .assign(&input.column(pos - (width - 1)));
        }
    }
    out
}

pub fn conv_forward(input: ArrayView2<'_, f64>, layer: &ConvLayer) -> ConvCache {
    let (d, s) = input.dim();
    assert_eq!(
        d,
        layer.in_dim(),
        "convolution input has {d} rows, layer expects {}",
        layer.in_dim()
    );
    assert!(s >= 1, "convolution input must have at least one column");
    let windows = windows(input, layer.width);
    let mut output = layer.weight.dot(&windows);
    output += &layer.bias.view().insert_axis(Axis(1));
    output.mapv_inplace(f64::tanh);
    ConvCache {
        windows,
        output,
        input_len: s,
    }
}

/// Output has exactly `s + width − 1` columns; positions outside the input are zero.
pub fn wide_convolution(input: ArrayView2<'_, f64>, layer: &ConvLayer) -> Array2<f64> {
    conv_forward(input, layer).output
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: Array2<f64>,
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl ConvCache {
    /// Accumulates parameter gradients into `weight`/`bias` and returns the
    /// input gradient when requested.
    pub fn backward_into(
        &self,
        layer: &ConvLayer,
        upstream: ArrayView2<'_, f64>,
        weight: &mut Array2<f64>,
        bias: &mut Array1<f64>,
        want_input: bool,
    ) -> Option<Array2<f64>> {
        assert_eq!(
            upstream.dim(),
            self.output.dim(),
            "upstream gradient shape mismatch"
        );
        let pre = &upstream * &self.output.mapv(|p| 1.0 - p * p);
        ndarray::linalg::general_mat_mul(1.0, &pre, &self.windows.t(), 1.0, weight);
        *bias += &pre.sum_axis(Axis(1));
        if !want_input {
            return None;
        }
        let d = layer.in_dim();
        let w = layer.width;
        let grad_windows = layer.weight.t().dot(&pre);
        let mut grad = Array2::zeros((d, self.input_len));
        for t in 0..grad_windows.ncols() {
            for k in 0..w {
                let pos = t + k;
                if pos < w - 1 || pos - (w - 1) >= self.input_len {
                    continue;
                }
                let mut col = grad.column_mut(pos - (w - 1));
                col += &grad_windows.slice(s![k * d..(k + 1) * d, t]);
            }
        }
        Some(grad)
    }
}

/// Analytic gradients of `sum(upstream ⊙ wide_convolution(input, layer))`.
pub fn conv_backward(
    input: ArrayView2<'_, f64>,
    layer: &ConvLayer,
    upstream: ArrayView2<'_, f64>,
) -> ConvGrads {
    let cache = conv_forward(input, layer);
    let mut weight = Array2::zeros(layer.weight.dim());
    let mut bias = Array1::zeros(layer.bias.len());
    let input = cache
        .backward_into(layer, upstream, &mut weight, &mut bias, true)
        .unwrap();
    ConvGrads {
        input,
        weight,
        bias,
    }
}
