/// Shared numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Root-finder residual contract `|p(r)| / (1 + |p'(r)||r|)`.
    pub residual: f64,
    /// Allowed deviation of `|z|` from 1 for values declared unimodular.
    pub unimodular: f64,
    /// `|a_k|` must stay below `1 - verblunsky_margin`.
    pub verblunsky_margin: f64,
    /// Minimum pairwise distance between interpolation nodes.
    pub node_separation: f64,
    /// Computed roots of the final polynomial farther than this from the
    /// unit circle are rejected.
    pub root_radius: f64,
    /// Relative imaginary part tolerated in weights, and the sum-to-one bound.
    pub weight: f64,
    /// Default per-coefficient persymmetry test.
    pub persymmetry: f64,
    /// Root-finder sweep cap.
    pub max_sweeps: usize,
    /// Root-finder correction threshold.
    pub correction: f64,
}

pub const TOL: Tolerances = Tolerances {
    residual: 1e-10,
    unimodular: 1e-12,
    verblunsky_margin: 1e-12,
    node_separation: 1e-12,
    root_radius: 1e-7,
    weight: 1e-9,
    persymmetry: 1e-10,
    max_sweeps: 500,
    correction: 1e-13,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}
