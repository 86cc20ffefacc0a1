//! Fully connected network with ReLU hidden layers and a linear output,
//! trained by plain backpropagation.

use std::io::{self, BufRead, Write};

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().copied());
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.inputs)) {
            *o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Parameter gradients, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

const CHECKPOINT_MAGIC: &str = "slicesim-qnet";
const CHECKPOINT_VERSION: u32 = 1;

impl Mlp {
    /// `sizes` = input width, hidden widths..., output width.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect();
        Self { layers }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass keeping every layer's input (post-activation).
    fn forward_trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::new();
            layer.forward(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut cur, next));
        }
        (inputs, cur)
    }

    /// Adds into `grads` the gradient of a loss whose derivative with respect
    /// to the network output is `d_output(output)`. Returns the output.
    pub fn accumulate_gradients(
        &self,
        x: &[f64],
        grads: &mut Gradients,
        d_output: impl FnOnce(&[f64]) -> Vec<f64>,
    ) -> Vec<f64> {
        let (inputs, output) = self.forward_trace(x);
        let mut delta = d_output(&output);
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &inputs[i];
            let (gw, gb) = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for (g, &v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            // ReLU derivative; `input` is the post-activation value.
            for (p, &v) in prev.iter_mut().zip(input) {
                if v <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        output
    }

    /// Gradient step: `theta -= lr * grads`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, g) in layer.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = it.next().expect("parameter vector too short");
            }
        }
        assert!(it.next().is_none(), "parameter vector too long");
    }

    /// Text checkpoint: a versioned header, then per layer its dimensions,
    /// one line per weight row and one bias line. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}")?;
        writeln!(out, "layers {}", self.layers.len())?;
        for l in &self.layers {
            writeln!(out, "dense {} {}", l.inputs, l.outputs)?;
            for row in l.weights.chunks_exact(l.inputs) {
                write_row(&mut out, row)?;
            }
            write_row(&mut out, &l.bias)?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> io::Result<Self> {
        let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut lines = input.lines();
        let mut next = || -> io::Result<String> {
            lines
                .next()
                .ok_or_else(|| bad("unexpected end of checkpoint".into()))?
        };
        let header = next()?;
        if header != format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}") {
            return Err(bad(format!("unsupported checkpoint header {header:?}")));
        }
        let count: usize = next()?
            .strip_prefix("layers ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("missing layer count".into()))?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let dims = next()?;
            let dims: Vec<usize> = dims
                .strip_prefix("dense ")
                .ok_or_else(|| bad(format!("bad layer line {dims:?}")))?
                .split_whitespace()
                .map(|s| s.parse().map_err(|e| bad(format!("{e}"))))
                .collect::<io::Result<_>>()?;
            let [inputs, outputs] = dims[..] else {
                return Err(bad("layer needs two dimensions".into()));
            };
            let mut weights = Vec::with_capacity(inputs * outputs);
            for _ in 0..outputs {
                weights.extend(parse_row(&next()?, inputs).map_err(bad)?);
            }
            let bias = parse_row(&next()?, outputs).map_err(bad)?;
            layers.push(Dense {
                inputs,
                outputs,
                weights,
                bias,
            });
        }
        if layers.is_empty() || layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
            return Err(bad("layer dimensions do not chain".into()));
        }
        Ok(Self { layers })
    }
}

fn write_row<W: Write>(out: &mut W, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            out.write_all(b" ")?;
        }
        first = false;
        write!(out, "{v}")?;
    }
    out.write_all(b"\n")
}

fn parse_row(line: &str, expected: usize) -> Result<Vec<f64>, String> {
    let row: Vec<f64> = line
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if row.len() != expected {
        return Err(format!("expected {expected} values, found {}", row.len()));
    }
    Ok(row)
}
