use serde::{Deserialize, Serialize};

use super::AdamConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvMode {
    /// One weight matrix per shortest-path distance `0..=r`, concatenated.
    Parametric,
    /// Single weight matrix over the self-plus-neighbors mean.
    DgcnnBaseline,
}

impl ConvMode {
    pub fn label(self) -> &'static str {
        match self {
            ConvMode::Parametric => "parametric",
            ConvMode::DgcnnBaseline => "dgcnn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortPoolK {
    Fixed(usize),
    /// Largest `k` such that at least this fraction of training graphs have
    /// `k` or more nodes, raised to `min` if smaller.
    Fraction {
        fraction: f64,
        min: usize,
    },
}

impl SortPoolK {
    pub fn resolve(self, node_counts: &[usize]) -> usize {
        match self {
            SortPoolK::Fixed(k) => k,
            SortPoolK::Fraction { fraction, min } => {
                if node_counts.is_empty() {
                    return min;
                }
                let mut sorted = node_counts.to_vec();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                let need =
                    ((fraction * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
                // the need-th largest size: exactly the graphs ranked before it
                // (and it) have at least that many nodes
                sorted[need - 1].max(min)
            }
        }
    }
}

impl Default for SortPoolK {
    fn default() -> Self {
        SortPoolK::Fraction {
            fraction: 0.6,
            min: 10,
        }
    }
}

/// Architecture and training hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mode: ConvMode,
    /// Largest shortest-path distance aggregated by a parametric layer.
    pub r: usize,
    pub conv_layers: usize,
    /// Channels per distance block (parametric) or per layer (baseline).
    pub channels: usize,
    pub sortpool_k: SortPoolK,
    pub conv1_filters: usize,
    pub pool_width: usize,
    pub conv2_filters: usize,
    pub conv2_width: usize,
    pub dense_width: usize,
    pub dropout: f64,
    pub optimizer: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mode: ConvMode::Parametric,
            r: 2,
            conv_layers: 3,
            channels: 32,
            sortpool_k: SortPoolK::default(),
            conv1_filters: 16,
            pool_width: 2,
            conv2_filters: 32,
            conv2_width: 5,
            dense_width: 128,
            dropout: 0.5,
            optimizer: AdamConfig::default(),
            epochs: 300,
            batch_size: 50,
            seed: 1,
        }
    }
}

impl ModelConfig {
    /// Output width of each graph convolution layer.
    pub fn layer_width(&self) -> usize {
        match self.mode {
            ConvMode::Parametric => (self.r + 1) * self.channels,
            ConvMode::DgcnnBaseline => self.channels,
        }
    }

    /// Width of the concatenated representation fed to SortPooling.
    pub fn total_channels(&self) -> usize {
        self.conv_layers * self.layer_width()
    }

    /// Distance range the shortest-path tensors must cover.
    pub fn sp_range(&self) -> usize {
        match self.mode {
            ConvMode::Parametric => self.r,
            ConvMode::DgcnnBaseline => 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.conv_layers == 0 || self.channels == 0 {
            return Err("need at least one graph convolution layer with positive width".into());
        }
        if self.conv1_filters == 0 || self.conv2_filters == 0 || self.dense_width == 0 {
            return Err("read-out widths must be positive".into());
        }
        if self.pool_width == 0 || self.conv2_width == 0 {
            return Err("pool and kernel widths must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(format!("dropout rate {} outside [0, 1)", self.dropout));
        }
        if self.batch_size == 0 {
            return Err("batch size must be positive".into());
        }
        if let SortPoolK::Fixed(0) = self.sortpool_k {
            return Err("sortpool k must be positive".into());
        }
        let o = &self.optimizer;
        if !(o.step_size > 0.0
            && (0.0..1.0).contains(&o.beta1)
            && (0.0..1.0).contains(&o.beta2)
            && o.epsilon > 0.0)
        {
            return Err("invalid optimizer settings".into());
        }
        Ok(())
    }
}
