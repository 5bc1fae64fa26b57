//! Direct multi-step network architectures with hand-written gradients.
//!
//! Inputs are `channels` standardized windows of length `window`, laid out
//! channel-major; outputs are `horizon` standardized values. All weights of
//! a model live in one flat vector so the optimizer and the codec can treat
//! every architecture alike.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

/// Output channels of the two convolution layers.
pub const CONV_CHANNELS: (usize, usize) = (5, 1);
/// Kernel sizes of the two convolution layers.
pub const CONV_KERNELS: (usize, usize) = (5, 6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Architecture {
    /// One dense layer, no activation.
    Linear,
    /// Dense layer as wide as the input with ReLU and an identity skip,
    /// followed by a dense output layer.
    ResMlp,
    /// Two valid-padded 1-D convolutions (ReLU after the first) and a dense
    /// output layer.
    Conv,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Linear,
        Architecture::ResMlp,
        Architecture::Conv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Linear => "linear",
            Architecture::ResMlp => "resmlp",
            Architecture::Conv => "conv",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Architecture::Linear => 0,
            Architecture::ResMlp => 1,
            Architecture::Conv => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    /// Smallest window the architecture accepts.
    pub fn min_window(self) -> usize {
        match self {
            Architecture::Conv => CONV_KERNELS.0 + CONV_KERNELS.1 - 1,
            _ => 1,
        }
    }
}

/// Weights of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub arch: Architecture,
    pub window: usize,
    pub channels: usize,
    pub horizon: usize,
    pub params: Vec<f64>,
}

/// Dimensions used to slice the flat parameter vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    d: usize,
    t: usize,
    // Linear: a[t*d], b[t]
    // ResMlp: w1[d*d], b1[d], w2[t*d], b2[t]
    // Conv: k1[c1*ch*k1], c1[c1], k2[c1*k2], c2[1], head[t*l2], hb[t]
    l1: usize,
    l2: usize,
}

impl Layout {
    fn of(arch: Architecture, window: usize, channels: usize, horizon: usize) -> Self {
        let (l1, l2) = match arch {
            Architecture::Conv => {
                let l1 = window + 1 - CONV_KERNELS.0;
                (l1, l1 + 1 - CONV_KERNELS.1)
            }
            _ => (0, 0),
        };
        Self {
            d: window * channels,
            t: horizon,
            l1,
            l2,
        }
    }
}

impl ModelParameters {
    pub fn num_params_for(
        arch: Architecture,
        window: usize,
        channels: usize,
        horizon: usize,
    ) -> usize {
        let l = Layout::of(arch, window, channels, horizon);
        match arch {
            Architecture::Linear => l.t * l.d + l.t,
            Architecture::ResMlp => l.d * l.d + l.d + l.t * l.d + l.t,
            Architecture::Conv => {
                let (c1, _) = CONV_CHANNELS;
                c1 * channels * CONV_KERNELS.0 + c1 + c1 * CONV_KERNELS.1 + 1 + l.t * l.l2 + l.t
            }
        }
    }

    /// Uniform `±1/sqrt(fan_in)` initialization of weights and biases.
    pub fn init<R: Rng + ?Sized>(
        arch: Architecture,
        window: usize,
        channels: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Self {
        assert!(
            window >= arch.min_window() && channels >= 1 && horizon >= 1,
            "invalid network shape"
        );
        let l = Layout::of(arch, window, channels, horizon);
        let mut params = Vec::with_capacity(Self::num_params_for(arch, window, channels, horizon));
        let mut fill = |count: usize, fan_in: usize| {
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            for _ in 0..count {
                params.push(rng.random_range(-bound..bound));
            }
        };
        match arch {
            Architecture::Linear => {
                fill(l.t * l.d + l.t, l.d);
            }
            Architecture::ResMlp => {
                fill(l.d * l.d + l.d, l.d);
                fill(l.t * l.d + l.t, l.d);
            }
            Architecture::Conv => {
                let (c1, _) = CONV_CHANNELS;
                let (k1, k2) = CONV_KERNELS;
                fill(c1 * channels * k1 + c1, channels * k1);
                fill(c1 * k2 + 1, c1 * k2);
                fill(l.t * l.l2 + l.t, l.l2);
            }
        }
        Self {
            arch,
            window,
            channels,
            horizon,
            params,
        }
    }

    pub fn input_len(&self) -> usize {
        self.window * self.channels
    }

    fn layout(&self) -> Layout {
        Layout::of(self.arch, self.window, self.channels, self.horizon)
    }

    pub fn is_consistent(&self) -> bool {
        self.window >= self.arch.min_window()
            && self.channels >= 1
            && self.horizon >= 1
            && self.params.len()
                == Self::num_params_for(self.arch, self.window, self.channels, self.horizon)
    }

    /// Forward pass on one standardized input.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.horizon];
        self.run(x, &mut y, None);
        y
    }

    /// Mean squared error over a batch, accumulating its gradient into
    /// `grad` (which must have `params.len()` entries).
    pub fn loss_and_grad(&self, inputs: &[&[f64]], targets: &[&[f64]], grad: &mut [f64]) -> f64 {
        let n = inputs.len();
        let scale = 1.0 / (n * self.horizon) as f64;
        let mut y = vec![0.0; self.horizon];
        let mut loss = 0.0;
        for (x, target) in inputs.iter().zip(targets) {
            self.run(x, &mut y, None);
            for (yj, tj) in y.iter_mut().zip(target.iter()) {
                let e = *yj - tj;
                loss += e * e;
                *yj = 2.0 * e * scale;
            }
            self.run(x, &mut [], Some((&y, grad)));
        }
        loss * scale
    }

    /// Mean squared error without gradients.
    pub fn loss(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> f64 {
        let mut y = vec![0.0; self.horizon];
        let mut loss = 0.0;
        for (x, target) in inputs.iter().zip(targets) {
            self.run(x, &mut y, None);
            loss += y
                .iter()
                .zip(target.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        loss / (inputs.len() * self.horizon) as f64
    }

    /// Forward pass writing into `out`, or, when `back` is given, a forward
    /// pass followed by backpropagation of `dy` into the gradient buffer.
    fn run(&self, x: &[f64], out: &mut [f64], back: Option<(&[f64], &mut [f64])>) {
        let l = self.layout();
        let p = &self.params;
        let (d, t) = (l.d, l.t);
        match self.arch {
            Architecture::Linear => {
                let (a, b) = p.split_at(t * d);
                match back {
                    None => {
                        for j in 0..t {
                            out[j] = b[j] + dot(&a[j * d..(j + 1) * d], x);
                        }
                    }
                    Some((dy, g)) => {
                        let (ga, gb) = g.split_at_mut(t * d);
                        for j in 0..t {
                            axpy(dy[j], x, &mut ga[j * d..(j + 1) * d]);
                            gb[j] += dy[j];
                        }
                    }
                }
            }
            Architecture::ResMlp => {
                let (w1, rest) = p.split_at(d * d);
                let (b1, rest) = rest.split_at(d);
                let (w2, b2) = rest.split_at(t * d);
                let z: Vec<f64> = (0..d)
                    .map(|i| b1[i] + dot(&w1[i * d..(i + 1) * d], x))
                    .collect();
                let h: Vec<f64> = z.iter().zip(x).map(|(z, x)| z.max(0.0) + x).collect();
                match back {
                    None => {
                        for j in 0..t {
                            out[j] = b2[j] + dot(&w2[j * d..(j + 1) * d], &h);
                        }
                    }
                    Some((dy, g)) => {
                        let (gw1, rest) = g.split_at_mut(d * d);
                        let (gb1, rest) = rest.split_at_mut(d);
                        let (gw2, gb2) = rest.split_at_mut(t * d);
                        let mut dh = vec![0.0; d];
                        for j in 0..t {
                            axpy(dy[j], &h, &mut gw2[j * d..(j + 1) * d]);
                            gb2[j] += dy[j];
                            axpy(dy[j], &w2[j * d..(j + 1) * d], &mut dh);
                        }
                        for i in 0..d {
                            if z[i] > 0.0 {
                                axpy(dh[i], x, &mut gw1[i * d..(i + 1) * d]);
                                gb1[i] += dh[i];
                            }
                        }
                    }
                }
            }
            Architecture::Conv => {
                let ch = self.channels;
                let w = self.window;
                let (c1, _) = CONV_CHANNELS;
                let (k1, k2) = CONV_KERNELS;
                let (kk1, rest) = p.split_at(c1 * ch * k1);
                let (cb1, rest) = rest.split_at(c1);
                let (kk2, rest) = rest.split_at(c1 * k2);
                let (cb2, rest) = rest.split_at(1);
                let (head, hb) = rest.split_at(t * l.l2);

                let mut z1 = vec![0.0; c1 * l.l1];
                for o in 0..c1 {
                    for i in 0..l.l1 {
                        let mut s = cb1[o];
                        for c in 0..ch {
                            let k = &kk1[(o * ch + c) * k1..(o * ch + c + 1) * k1];
                            s += dot(k, &x[c * w + i..c * w + i + k1]);
                        }
                        z1[o * l.l1 + i] = s;
                    }
                }
                let a1: Vec<f64> = z1.iter().map(|v| v.max(0.0)).collect();
                let mut h2 = vec![cb2[0]; l.l2];
                for (i, h) in h2.iter_mut().enumerate() {
                    for o in 0..c1 {
                        *h += dot(
                            &kk2[o * k2..(o + 1) * k2],
                            &a1[o * l.l1 + i..o * l.l1 + i + k2],
                        );
                    }
                }
                match back {
                    None => {
                        for j in 0..t {
                            out[j] = hb[j] + dot(&head[j * l.l2..(j + 1) * l.l2], &h2);
                        }
                    }
                    Some((dy, g)) => {
                        let (gk1, rest) = g.split_at_mut(c1 * ch * k1);
                        let (gc1, rest) = rest.split_at_mut(c1);
                        let (gk2, rest) = rest.split_at_mut(c1 * k2);
                        let (gc2, rest) = rest.split_at_mut(1);
                        let (ghead, ghb) = rest.split_at_mut(t * l.l2);
                        let mut dh2 = vec![0.0; l.l2];
                        for j in 0..t {
                            axpy(dy[j], &h2, &mut ghead[j * l.l2..(j + 1) * l.l2]);
                            ghb[j] += dy[j];
                            axpy(dy[j], &head[j * l.l2..(j + 1) * l.l2], &mut dh2);
                        }
                        gc2[0] += dh2.iter().sum::<f64>();
                        let mut da1 = vec![0.0; c1 * l.l1];
                        for o in 0..c1 {
                            for (i, &dh) in dh2.iter().enumerate() {
                                let base = o * l.l1 + i;
                                axpy(dh, &a1[base..base + k2], &mut gk2[o * k2..(o + 1) * k2]);
                                axpy(dh, &kk2[o * k2..(o + 1) * k2], &mut da1[base..base + k2]);
                            }
                        }
                        for o in 0..c1 {
                            for i in 0..l.l1 {
                                let idx = o * l.l1 + i;
                                if z1[idx] <= 0.0 {
                                    continue;
                                }
                                let dz = da1[idx];
                                gc1[o] += dz;
                                for c in 0..ch {
                                    let off = (o * ch + c) * k1;
                                    axpy(
                                        dz,
                                        &x[c * w + i..c * w + i + k1],
                                        &mut gk1[off..off + k1],
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
