use crate::measures::CoherenceSummary;
use crate::tomography::Uncertainties;

/// One sweep point: the coherence budget of the output state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioResult {
    /// φ/π for the c-phase sweep, displacement in µm for the SPDC sweep.
    pub x: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub t2: f64,
    /// (D_A² + D_B²)/2 + T²
    pub s2: f64,
    /// D²/P with P the output purity
    pub d2_norm: f64,
    /// T²/P
    pub t2_norm: f64,
    pub purity: f64,
    /// Zero unless the point was reconstructed from simulated counts.
    pub uncertainty: Uncertainties,
}

impl ScenarioResult {
    pub fn from_summary(x: f64, s: &CoherenceSummary) -> Self {
        Self {
            x,
            d_a: s.d_a(),
            d_b: s.d_b(),
            t2: s.t2,
            s2: s.s2(),
            d2_norm: s.d2() / s.purity,
            t2_norm: s.t2 / s.purity,
            purity: s.purity,
            uncertainty: Uncertainties::default(),
        }
    }

    pub fn d2(&self) -> f64 {
        (self.d_a * self.d_a + self.d_b * self.d_b) / 2.0
    }
}
