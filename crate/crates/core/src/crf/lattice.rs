/// Log-domain scores of one utterance under one model.
///
/// `node(t, y)` scores label `y` at position `t`; `edge(t, p, y)` scores the
/// transition from `p` at `t - 1` to `y` at `t`, for `t >= 1`. There are no
/// start or stop transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    len: usize,
    num_labels: usize,
    node: Vec<f64>,
    edge: Vec<f64>,
}

impl Lattice {
    /// An all-zero lattice.
    pub fn zeros(len: usize, num_labels: usize) -> Self {
        Self {
            len,
            num_labels,
            node: vec![0.0; len * num_labels],
            edge: vec![0.0; len.saturating_sub(1) * num_labels * num_labels],
        }
    }

    /// Builds a lattice from flat score arrays: `node` is `len x L`, `edge`
    /// is `(len - 1) x L x L`.
    pub fn from_scores(len: usize, num_labels: usize, node: Vec<f64>, edge: Vec<f64>) -> Self {
        assert_eq!(node.len(), len * num_labels, "node score shape");
        assert_eq!(
            edge.len(),
            len.saturating_sub(1) * num_labels * num_labels,
            "edge score shape"
        );
        Self {
            len,
            num_labels,
            node,
            edge,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn node(&self, t: usize, y: usize) -> f64 {
        self.node[t * self.num_labels + y]
    }

    pub fn node_mut(&mut self, t: usize, y: usize) -> &mut f64 {
        &mut self.node[t * self.num_labels + y]
    }

    fn edge_offset(&self, t: usize, prev: usize, y: usize) -> usize {
        debug_assert!(t >= 1 && t < self.len);
        ((t - 1) * self.num_labels + prev) * self.num_labels + y
    }

    pub fn edge(&self, t: usize, prev: usize, y: usize) -> f64 {
        self.edge[self.edge_offset(t, prev, y)]
    }

    pub fn edge_mut(&mut self, t: usize, prev: usize, y: usize) -> &mut f64 {
        let i = self.edge_offset(t, prev, y);
        &mut self.edge[i]
    }

    /// Score of a complete label path, accumulated left to right.
    pub fn path_score(&self, path: &[usize]) -> f64 {
        assert_eq!(path.len(), self.len, "path length");
        let mut score = 0.0;
        for (t, &y) in path.iter().enumerate() {
            if t == 0 {
                score = self.node(0, y);
            } else {
                score = score + self.edge(t, path[t - 1], y) + self.node(t, y);
            }
        }
        score
    }
}

/// `ln Σ exp(x)`, shifted by the maximum. Returns `-inf` for an empty or
/// all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardBackward {
    num_labels: usize,
    /// `alpha[t * L + y]`: log score of all prefixes ending in `y` at `t`.
    pub alpha: Vec<f64>,
    /// `beta[t * L + y]`: log score of all suffixes after `y` at `t`.
    pub beta: Vec<f64>,
    /// Log partition function from the forward pass.
    pub log_z: f64,
    /// Log partition function recomputed from the backward pass.
    pub log_z_backward: f64,
}

impl ForwardBackward {
    pub fn alpha(&self, t: usize, y: usize) -> f64 {
        self.alpha[t * self.num_labels + y]
    }

    pub fn beta(&self, t: usize, y: usize) -> f64 {
        self.beta[t * self.num_labels + y]
    }
}

pub fn forward_backward(lat: &Lattice) -> ForwardBackward {
    let (len, l) = (lat.len, lat.num_labels);
    let mut alpha = vec![0.0; len * l];
    let mut beta = vec![0.0; len * l];
    let mut buf = vec![0.0; l];
    if len == 0 {
        return ForwardBackward {
            num_labels: l,
            alpha,
            beta,
            log_z: 0.0,
            log_z_backward: 0.0,
        };
    }

    for (y, a) in alpha[..l].iter_mut().enumerate() {
        *a = lat.node(0, y);
    }
    for t in 1..len {
        for y in 0..l {
            for (p, b) in buf.iter_mut().enumerate() {
                *b = alpha[(t - 1) * l + p] + lat.edge(t, p, y);
            }
            alpha[t * l + y] = log_sum_exp(&buf) + lat.node(t, y);
        }
    }
    let log_z = log_sum_exp(&alpha[(len - 1) * l..]);

    for t in (0..len - 1).rev() {
        for p in 0..l {
            for (y, b) in buf.iter_mut().enumerate() {
                *b = lat.edge(t + 1, p, y) + lat.node(t + 1, y) + beta[(t + 1) * l + y];
            }
            beta[t * l + p] = log_sum_exp(&buf);
        }
    }
    for (y, b) in buf.iter_mut().enumerate() {
        *b = lat.node(0, y) + beta[y];
    }
    let log_z_backward = log_sum_exp(&buf);

    ForwardBackward {
        num_labels: l,
        alpha,
        beta,
        log_z,
        log_z_backward,
    }
}

/// Posterior label and transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    num_labels: usize,
    unigram: Vec<f64>,
    pairwise: Vec<f64>,
}

impl Marginals {
    /// `P(y_t = y)`.
    pub fn unigram(&self, t: usize, y: usize) -> f64 {
        self.unigram[t * self.num_labels + y]
    }

    /// `P(y_{t-1} = prev, y_t = y)` for `t >= 1`.
    pub fn pairwise(&self, t: usize, prev: usize, y: usize) -> f64 {
        self.pairwise[((t - 1) * self.num_labels + prev) * self.num_labels + y]
    }
}

/// Marginals from an already computed forward–backward pass.
pub(crate) fn marginals_from(lat: &Lattice, fb: &ForwardBackward) -> Marginals {
    let (len, l) = (lat.len, lat.num_labels);
    let mut unigram = vec![0.0; len * l];
    for t in 0..len {
        for y in 0..l {
            unigram[t * l + y] = (fb.alpha(t, y) + fb.beta(t, y) - fb.log_z).exp();
        }
    }
    let mut pairwise = vec![0.0; len.saturating_sub(1) * l * l];
    for t in 1..len {
        for p in 0..l {
            for y in 0..l {
                pairwise[((t - 1) * l + p) * l + y] =
                    (fb.alpha(t - 1, p) + lat.edge(t, p, y) + lat.node(t, y) + fb.beta(t, y)
                        - fb.log_z)
                        .exp();
            }
        }
    }
    Marginals {
        num_labels: l,
        unigram,
        pairwise,
    }
}

pub fn posterior_marginals(lat: &Lattice) -> Marginals {
    marginals_from(lat, &forward_backward(lat))
}

/// Highest-scoring label path and its score. Ties go to the lower label
/// index, both at each back-pointer and at the final position.
pub fn viterbi_decode(lat: &Lattice) -> (Vec<usize>, f64) {
    let (len, l) = (lat.len, lat.num_labels);
    if len == 0 || l == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta = vec![0.0; len * l];
    let mut back = vec![0usize; len * l];
    for (y, d) in delta[..l].iter_mut().enumerate() {
        *d = lat.node(0, y);
    }
    for t in 1..len {
        for y in 0..l {
            let mut best = 0;
            let mut best_score = delta[(t - 1) * l] + lat.edge(t, 0, y);
            for p in 1..l {
                let s = delta[(t - 1) * l + p] + lat.edge(t, p, y);
                if s > best_score {
                    best = p;
                    best_score = s;
                }
            }
            delta[t * l + y] = best_score + lat.node(t, y);
            back[t * l + y] = best;
        }
    }
    let last = &delta[(len - 1) * l..];
    let mut y = 0;
    for (cand, &s) in last.iter().enumerate().skip(1) {
        if s > last[y] {
            y = cand;
        }
    }
    let score = last[y];
    let mut path = vec![0; len];
    path[len - 1] = y;
    for t in (1..len).rev() {
        y = back[t * l + y];
        path[t - 1] = y;
    }
    (path, score)
}
