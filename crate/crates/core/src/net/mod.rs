//! Actor-critic network with a shared convolutional terrain encoder.
//!
//! Fixed architecture: the 21x21 height scan passes through two 3x3
//! same-padding conv layers (8 and 16 channels) with ELU and 2x2 floor
//! max-pooling (21 -> 10 -> 5), then a 400 -> 128 dense layer to a latent
//! terrain embedding. The embedding is concatenated with the 49 proprioceptive
//! observations and fed to two independent ELU MLPs (128/128/64): the actor
//! head emits 12 action means (plus a learned state-independent log-std), the
//! critic head one value. Both heads backpropagate into the shared encoder;
//! its gradient is the sum of the two contributions.
//!
//! Gradients are exact reverse-mode, computed by hand and verified against
//! central finite differences.

pub mod checkpoint;
pub mod layers;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::{seeded_rng, streams};
use crate::Result;
use layers::*;

pub const ACTION_DIM: usize = 12;
pub const PROPRIO_DIM: usize = 49;
pub const HEIGHTMAP_DIM: usize = 441;
pub const OBS_DIM: usize = PROPRIO_DIM + HEIGHTMAP_DIM;
pub const LATENT_DIM: usize = 128;
pub const TRUNK_IN_DIM: usize = PROPRIO_DIM + LATENT_DIM;

const HM_SIDE: usize = 21;
const C1: usize = 8;
const C2: usize = 16;
const P1_SIDE: usize = HM_SIDE / 2; // 10, floor pooling
const P2_SIDE: usize = P1_SIDE / 2; // 5
const FLAT_DIM: usize = C2 * P2_SIDE * P2_SIDE; // 400
const MLP_H0: usize = 128;
const MLP_H1: usize = 128;
const MLP_H2: usize = 64;

/// Total parameter count of the fixed architecture.
pub const PARAM_COUNT: usize = 148_537;

/// Initial log standard deviation of the action distribution: ln(0.5).
pub const INIT_LOG_STD: f64 = -0.693_147_180_559_945_3;

/// Named parameter blocks, in flat storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum Block {
    Conv1W,
    Conv1B,
    Conv2W,
    Conv2B,
    EncW,
    EncB,
    ActorW0,
    ActorB0,
    ActorW1,
    ActorB1,
    ActorW2,
    ActorB2,
    ActorW3,
    ActorB3,
    CriticW0,
    CriticB0,
    CriticW1,
    CriticB1,
    CriticW2,
    CriticB2,
    CriticW3,
    CriticB3,
    LogStd,
}

/// Static description of one parameter block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

fn block_defs() -> [(&'static str, Vec<usize>); 23] {
    [
        ("conv1_w", vec![C1, 1, 3, 3]),
        ("conv1_b", vec![C1]),
        ("conv2_w", vec![C2, C1, 3, 3]),
        ("conv2_b", vec![C2]),
        ("enc_w", vec![LATENT_DIM, FLAT_DIM]),
        ("enc_b", vec![LATENT_DIM]),
        ("actor_w0", vec![MLP_H0, TRUNK_IN_DIM]),
        ("actor_b0", vec![MLP_H0]),
        ("actor_w1", vec![MLP_H1, MLP_H0]),
        ("actor_b1", vec![MLP_H1]),
        ("actor_w2", vec![MLP_H2, MLP_H1]),
        ("actor_b2", vec![MLP_H2]),
        ("actor_w3", vec![ACTION_DIM, MLP_H2]),
        ("actor_b3", vec![ACTION_DIM]),
        ("critic_w0", vec![MLP_H0, TRUNK_IN_DIM]),
        ("critic_b0", vec![MLP_H0]),
        ("critic_w1", vec![MLP_H1, MLP_H0]),
        ("critic_b1", vec![MLP_H1]),
        ("critic_w2", vec![MLP_H2, MLP_H1]),
        ("critic_b2", vec![MLP_H2]),
        ("critic_w3", vec![1, MLP_H2]),
        ("critic_b3", vec![1]),
        ("log_std", vec![ACTION_DIM]),
    ]
}

/// The parameter layout: block names, shapes, and flat offsets.
pub fn layout() -> &'static Vec<BlockInfo> {
    use std::sync::OnceLock;
    static LAYOUT: OnceLock<Vec<BlockInfo>> = OnceLock::new();
    LAYOUT.get_or_init(|| {
        let mut offset = 0;
        let mut out = Vec::new();
        for (name, shape) in block_defs() {
            let len: usize = shape.iter().product();
            out.push(BlockInfo { name: name.to_string(), shape, offset, len });
            offset += len;
        }
        assert_eq!(offset, PARAM_COUNT, "parameter layout drifted from PARAM_COUNT");
        out
    })
}

pub fn block_range(b: Block) -> std::ops::Range<usize> {
    let info = &layout()[b as usize];
    info.offset..info.offset + info.len
}

/// All weights of the shared encoder, the actor and critic MLPs, and the
/// action log-std, in one flat buffer.
///
/// The encoder blocks are single storage referenced by both forward paths;
/// the two MLP heads occupy disjoint ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    data: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros() -> Self {
        PolicyParams { data: vec![0.0; PARAM_COUNT] }
    }

    pub fn from_flat(data: Vec<f64>) -> Result<Self> {
        if data.len() != PARAM_COUNT {
            return Err(Error::Net(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Net("non-finite parameter".into()));
        }
        Ok(PolicyParams { data })
    }

    /// Seeded initialization: orthogonal-style rows for dense layers (gain
    /// sqrt(2) on hidden layers, 0.01 on the actor output, 1.0 on the critic
    /// output), uniform fan-in for convolutions, zero biases, log-std at
    /// ln(0.5).
    pub fn init(seed: u64) -> Self {
        let mut p = Self::zeros();
        let mut rng = seeded_rng(seed, streams::NET_INIT, 0);
        let root2 = std::f64::consts::SQRT_2;

        for (block, gain) in [
            (Block::EncW, root2),
            (Block::ActorW0, root2),
            (Block::ActorW1, root2),
            (Block::ActorW2, root2),
            (Block::ActorW3, 0.01),
            (Block::CriticW0, root2),
            (Block::CriticW1, root2),
            (Block::CriticW2, root2),
            (Block::CriticW3, 1.0),
        ] {
            let info = &layout()[block as usize];
            let (out_dim, in_dim) = (info.shape[0], info.shape[1]);
            let w = orthogonal_rows(out_dim, in_dim, gain, &mut rng);
            p.data[info.offset..info.offset + info.len].copy_from_slice(&w);
        }
        for block in [Block::Conv1W, Block::Conv2W] {
            let info = &layout()[block as usize];
            let fan_in: usize = info.shape[1..].iter().product();
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut p.data[info.offset..info.offset + info.len] {
                *v = rng.gen_range(-bound..bound);
            }
        }
        for v in &mut p.data[block_range(Block::LogStd)] {
            *v = INIT_LOG_STD;
        }
        p
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn block(&self, b: Block) -> &[f64] {
        &self.data[block_range(b)]
    }

    pub fn log_std(&self) -> &[f64] {
        self.block(Block::LogStd)
    }

    pub fn action_std(&self) -> [f64; ACTION_DIM] {
        let mut std = [0.0; ACTION_DIM];
        for (s, ls) in std.iter_mut().zip(self.log_std()) {
            *s = ls.exp();
        }
        std
    }
}

/// Orthonormal rows (out_dim <= in_dim) via modified Gram-Schmidt over seeded
/// Gaussian draws, scaled by `gain`.
fn orthogonal_rows(out_dim: usize, in_dim: usize, gain: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!(out_dim <= in_dim, "orthogonal init needs out_dim <= in_dim");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(out_dim);
    while rows.len() < out_dim {
        let mut v: Vec<f64> = (0..in_dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &rows {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue; // astronomically unlikely; redraw keeps determinism
        }
        v.iter_mut().for_each(|x| *x /= norm);
        rows.push(v);
    }
    let mut flat = Vec::with_capacity(out_dim * in_dim);
    for row in rows {
        flat.extend(row.into_iter().map(|x| x * gain));
    }
    flat
}

/// Actor/critic outputs for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOutput {
    pub action_mean: [f64; ACTION_DIM],
    pub action_std: [f64; ACTION_DIM],
    pub value: f64,
}

/// Forward activations recorded for the backward pass. One per worker;
/// buffers are reused across calls.
#[derive(Debug, Clone)]
pub struct Trace {
    heightmap: Vec<f64>,   // 441
    conv1_pre: Vec<f64>,   // 8 x 21 x 21
    conv1_act: Vec<f64>,
    pool1_out: Vec<f64>,   // 8 x 10 x 10
    pool1_idx: Vec<u32>,
    conv2_pre: Vec<f64>,   // 16 x 10 x 10
    conv2_act: Vec<f64>,
    pool2_out: Vec<f64>,   // 16 x 5 x 5 = 400
    pool2_idx: Vec<u32>,
    enc_pre: Vec<f64>,     // 128
    trunk_in: Vec<f64>,    // 177 = 49 proprio + 128 latent
    actor_pre: [Vec<f64>; 3],
    actor_act: [Vec<f64>; 3],
    critic_pre: [Vec<f64>; 3],
    critic_act: [Vec<f64>; 3],
    recorded: bool,
}

impl Default for Trace {
    fn default() -> Self {
        Self::new()
    }
}

impl Trace {
    pub fn new() -> Self {
        Trace {
            heightmap: vec![0.0; HEIGHTMAP_DIM],
            conv1_pre: vec![0.0; C1 * HM_SIDE * HM_SIDE],
            conv1_act: vec![0.0; C1 * HM_SIDE * HM_SIDE],
            pool1_out: vec![0.0; C1 * P1_SIDE * P1_SIDE],
            pool1_idx: vec![0; C1 * P1_SIDE * P1_SIDE],
            conv2_pre: vec![0.0; C2 * P1_SIDE * P1_SIDE],
            conv2_act: vec![0.0; C2 * P1_SIDE * P1_SIDE],
            pool2_out: vec![0.0; FLAT_DIM],
            pool2_idx: vec![0; FLAT_DIM],
            enc_pre: vec![0.0; LATENT_DIM],
            trunk_in: vec![0.0; TRUNK_IN_DIM],
            actor_pre: [vec![0.0; MLP_H0], vec![0.0; MLP_H1], vec![0.0; MLP_H2]],
            actor_act: [vec![0.0; MLP_H0], vec![0.0; MLP_H1], vec![0.0; MLP_H2]],
            critic_pre: [vec![0.0; MLP_H0], vec![0.0; MLP_H1], vec![0.0; MLP_H2]],
            critic_act: [vec![0.0; MLP_H0], vec![0.0; MLP_H1], vec![0.0; MLP_H2]],
            recorded: false,
        }
    }

    /// Latent terrain embedding from the most recent forward.
    pub fn latent(&self) -> &[f64] {
        &self.trunk_in[PROPRIO_DIM..]
    }
}

/// Scratch space for the backward pass, reused across calls.
#[derive(Debug, Clone)]
pub struct Scratch {
    d_head: Vec<f64>,
    d_h2: Vec<f64>,
    d_h1: Vec<f64>,
    d_h0: Vec<f64>,
    d_trunk: Vec<f64>,
    d_latent: Vec<f64>,
    d_flat: Vec<f64>,
    d_conv2_act: Vec<f64>,
    d_pool1: Vec<f64>,
    d_conv1_act: Vec<f64>,
}

impl Default for Scratch {
    fn default() -> Self {
        Self::new()
    }
}

impl Scratch {
    pub fn new() -> Self {
        Scratch {
            d_head: vec![0.0; ACTION_DIM],
            d_h2: vec![0.0; MLP_H2],
            d_h1: vec![0.0; MLP_H1],
            d_h0: vec![0.0; MLP_H0],
            d_trunk: vec![0.0; TRUNK_IN_DIM],
            d_latent: vec![0.0; LATENT_DIM],
            d_flat: vec![0.0; FLAT_DIM],
            d_conv2_act: vec![0.0; C2 * P1_SIDE * P1_SIDE],
            d_pool1: vec![0.0; C1 * P1_SIDE * P1_SIDE],
            d_conv1_act: vec![0.0; C1 * HM_SIDE * HM_SIDE],
        }
    }
}

/// Encode a 21x21 height scan into the 128-d terrain latent.
///
/// Shape chain: 21x21x1 -> 21x21x8 -> 10x10x8 -> 10x10x16 -> 5x5x16 -> 400
/// -> 128, ELU after each conv and after the dense layer.
pub fn encode(params: &PolicyParams, heightmap: &[f64], trace: &mut Trace) -> Result<[f64; LATENT_DIM]> {
    if heightmap.len() != HEIGHTMAP_DIM {
        return Err(Error::Net(format!("heightmap must have {HEIGHTMAP_DIM} cells")));
    }
    if heightmap.iter().any(|v| !v.is_finite()) {
        return Err(Error::Net("non-finite heightmap input".into()));
    }
    trace.heightmap.copy_from_slice(heightmap);
    conv3x3_forward(
        params.block(Block::Conv1W),
        params.block(Block::Conv1B),
        &trace.heightmap,
        1,
        HM_SIDE,
        HM_SIDE,
        C1,
        &mut trace.conv1_pre,
    );
    for (a, p) in trace.conv1_act.iter_mut().zip(&trace.conv1_pre) {
        *a = elu(*p);
    }
    maxpool2_forward(
        &trace.conv1_act,
        C1,
        HM_SIDE,
        HM_SIDE,
        &mut trace.pool1_out,
        &mut trace.pool1_idx,
    );
    conv3x3_forward(
        params.block(Block::Conv2W),
        params.block(Block::Conv2B),
        &trace.pool1_out,
        C1,
        P1_SIDE,
        P1_SIDE,
        C2,
        &mut trace.conv2_pre,
    );
    for (a, p) in trace.conv2_act.iter_mut().zip(&trace.conv2_pre) {
        *a = elu(*p);
    }
    maxpool2_forward(
        &trace.conv2_act,
        C2,
        P1_SIDE,
        P1_SIDE,
        &mut trace.pool2_out,
        &mut trace.pool2_idx,
    );
    dense_forward(
        params.block(Block::EncW),
        params.block(Block::EncB),
        &trace.pool2_out,
        &mut trace.enc_pre,
    );
    let mut latent = [0.0; LATENT_DIM];
    for (l, p) in latent.iter_mut().zip(&trace.enc_pre) {
        *l = elu(*p);
    }
    Ok(latent)
}

fn mlp_forward(
    params: &PolicyParams,
    blocks: [Block; 8],
    input: &[f64],
    pre: &mut [Vec<f64>; 3],
    act: &mut [Vec<f64>; 3],
    head_out: &mut [f64],
) {
    let mut x: &[f64] = input;
    for layer in 0..3 {
        dense_forward(
            params.block(blocks[2 * layer]),
            params.block(blocks[2 * layer + 1]),
            x,
            &mut pre[layer],
        );
        for (a, p) in act[layer].iter_mut().zip(&pre[layer]) {
            *a = elu(*p);
        }
        x = &act[layer];
    }
    dense_forward(params.block(blocks[6]), params.block(blocks[7]), x, head_out);
}

const ACTOR_BLOCKS: [Block; 8] = [
    Block::ActorW0,
    Block::ActorB0,
    Block::ActorW1,
    Block::ActorB1,
    Block::ActorW2,
    Block::ActorB2,
    Block::ActorW3,
    Block::ActorB3,
];

const CRITIC_BLOCKS: [Block; 8] = [
    Block::CriticW0,
    Block::CriticB0,
    Block::CriticW1,
    Block::CriticB1,
    Block::CriticW2,
    Block::CriticB2,
    Block::CriticW3,
    Block::CriticB3,
];

/// Full forward pass over one 490-d observation.
pub fn forward(params: &PolicyParams, obs: &[f64], trace: &mut Trace) -> Result<NetOutput> {
    if obs.len() != OBS_DIM {
        return Err(Error::Net(format!("observation must have length {OBS_DIM}, got {}", obs.len())));
    }
    let latent = encode(params, &obs[PROPRIO_DIM..], trace)?;
    trace.trunk_in[..PROPRIO_DIM].copy_from_slice(&obs[..PROPRIO_DIM]);
    trace.trunk_in[PROPRIO_DIM..].copy_from_slice(&latent);

    let Trace { trunk_in, actor_pre, actor_act, critic_pre, critic_act, .. } = trace;
    let mut mean = [0.0; ACTION_DIM];
    mlp_forward(params, ACTOR_BLOCKS, trunk_in, actor_pre, actor_act, &mut mean);
    let mut value = [0.0; 1];
    mlp_forward(params, CRITIC_BLOCKS, trunk_in, critic_pre, critic_act, &mut value);
    trace.recorded = true;
    Ok(NetOutput { action_mean: mean, action_std: params.action_std(), value: value[0] })
}

#[allow(clippy::too_many_arguments)]
fn mlp_backward(
    params: &PolicyParams,
    blocks: [Block; 8],
    trunk_in: &[f64],
    pre: &[Vec<f64>; 3],
    act: &[Vec<f64>; 3],
    d_head: &[f64],
    grad: &mut [f64],
    d_h2: &mut [f64],
    d_h1: &mut [f64],
    d_h0: &mut [f64],
    d_trunk: &mut [f64],
) {
    {
        let (gw, gb) = wb_grads(grad, blocks[6], blocks[7]);
        dense_backward(params.block(blocks[6]), &act[2], d_head, gw, gb, Some(d_h2));
    }
    for (d, p) in d_h2.iter_mut().zip(&pre[2]) {
        *d *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, blocks[4], blocks[5]);
        dense_backward(params.block(blocks[4]), &act[1], d_h2, gw, gb, Some(d_h1));
    }
    for (d, p) in d_h1.iter_mut().zip(&pre[1]) {
        *d *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, blocks[2], blocks[3]);
        dense_backward(params.block(blocks[2]), &act[0], d_h1, gw, gb, Some(d_h0));
    }
    for (d, p) in d_h0.iter_mut().zip(&pre[0]) {
        *d *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, blocks[0], blocks[1]);
        dense_backward(params.block(blocks[0]), trunk_in, d_h0, gw, gb, Some(d_trunk));
    }
}

/// Reverse-mode gradients for one recorded forward.
///
/// `d_mean` and `d_value` are the loss derivatives at the actor and critic
/// outputs; gradients accumulate into `grad` (flat parameter layout). The
/// shared-encoder gradient is the sum of the actor-path and critic-path
/// contributions. Gradients with respect to `log_std` are handled by the
/// caller (the distribution derivatives are closed-form).
pub fn backward(
    params: &PolicyParams,
    trace: &Trace,
    scratch: &mut Scratch,
    d_mean: &[f64; ACTION_DIM],
    d_value: f64,
    grad: &mut [f64],
) -> Result<()> {
    if !trace.recorded {
        return Err(Error::Net("backward called without a recorded forward".into()));
    }
    if grad.len() != PARAM_COUNT {
        return Err(Error::Net("gradient buffer has wrong length".into()));
    }
    let Scratch {
        d_head,
        d_h2,
        d_h1,
        d_h0,
        d_trunk,
        d_latent,
        d_flat,
        d_conv2_act,
        d_pool1,
        d_conv1_act,
    } = scratch;

    // Actor path.
    d_head.copy_from_slice(d_mean);
    mlp_backward(
        params,
        ACTOR_BLOCKS,
        &trace.trunk_in,
        &trace.actor_pre,
        &trace.actor_act,
        d_head,
        grad,
        d_h2,
        d_h1,
        d_h0,
        d_trunk,
    );
    d_latent.copy_from_slice(&d_trunk[PROPRIO_DIM..]);

    // Critic path; encoder contributions add onto the actor's.
    let d_value_slice = [d_value];
    mlp_backward(
        params,
        CRITIC_BLOCKS,
        &trace.trunk_in,
        &trace.critic_pre,
        &trace.critic_act,
        &d_value_slice,
        grad,
        d_h2,
        d_h1,
        d_h0,
        d_trunk,
    );
    for (dl, dc) in d_latent.iter_mut().zip(&d_trunk[PROPRIO_DIM..]) {
        *dl += dc;
    }

    // Encoder: dense -> pool2 -> conv2 -> pool1 -> conv1.
    for (dl, p) in d_latent.iter_mut().zip(&trace.enc_pre) {
        *dl *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, Block::EncW, Block::EncB);
        dense_backward(params.block(Block::EncW), &trace.pool2_out, d_latent, gw, gb, Some(d_flat));
    }
    maxpool2_backward(d_flat, &trace.pool2_idx, d_conv2_act);
    for (d, p) in d_conv2_act.iter_mut().zip(&trace.conv2_pre) {
        *d *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, Block::Conv2W, Block::Conv2B);
        conv3x3_backward(
            params.block(Block::Conv2W),
            &trace.pool1_out,
            C1,
            P1_SIDE,
            P1_SIDE,
            C2,
            d_conv2_act,
            gw,
            gb,
            Some(d_pool1),
        );
    }
    maxpool2_backward(d_pool1, &trace.pool1_idx, d_conv1_act);
    for (d, p) in d_conv1_act.iter_mut().zip(&trace.conv1_pre) {
        *d *= elu_prime(*p);
    }
    {
        let (gw, gb) = wb_grads(grad, Block::Conv1W, Block::Conv1B);
        conv3x3_backward(
            params.block(Block::Conv1W),
            &trace.heightmap,
            1,
            HM_SIDE,
            HM_SIDE,
            C1,
            d_conv1_act,
            gw,
            gb,
            None,
        );
    }
    Ok(())
}

/// Split disjoint weight/bias gradient slices out of the flat buffer. Relies
/// on each bias block directly following its weight block in the layout.
fn wb_grads(grad: &mut [f64], w: Block, b: Block) -> (&mut [f64], &mut [f64]) {
    let wr = block_range(w);
    let br = block_range(b);
    debug_assert!(wr.end <= br.start);
    let (head, tail) = grad.split_at_mut(br.start);
    (&mut head[wr], &mut tail[..br.end - br.start])
}

/// Log density and entropy of the diagonal Gaussian policy at `action`.
pub fn log_prob_and_entropy(
    mean: &[f64; ACTION_DIM],
    std: &[f64; ACTION_DIM],
    action: &[f64; ACTION_DIM],
) -> (f64, f64) {
    const LN_2PI: f64 = 1.837_877_066_409_345_3;
    let mut logp = 0.0;
    let mut entropy = 0.0;
    for j in 0..ACTION_DIM {
        let z = (action[j] - mean[j]) / std[j];
        logp += -0.5 * z * z - std[j].ln() - 0.5 * LN_2PI;
        entropy += 0.5 * (LN_2PI + 1.0) + std[j].ln();
    }
    (logp, entropy)
}

/// d(logp)/d(mean_j) for the diagonal Gaussian.
pub fn d_log_prob_d_mean(
    mean: &[f64; ACTION_DIM],
    std: &[f64; ACTION_DIM],
    action: &[f64; ACTION_DIM],
) -> [f64; ACTION_DIM] {
    let mut d = [0.0; ACTION_DIM];
    for j in 0..ACTION_DIM {
        d[j] = (action[j] - mean[j]) / (std[j] * std[j]);
    }
    d
}

/// d(logp)/d(log_std_j) for the diagonal Gaussian.
pub fn d_log_prob_d_log_std(
    mean: &[f64; ACTION_DIM],
    std: &[f64; ACTION_DIM],
    action: &[f64; ACTION_DIM],
) -> [f64; ACTION_DIM] {
    let mut d = [0.0; ACTION_DIM];
    for j in 0..ACTION_DIM {
        let z = (action[j] - mean[j]) / std[j];
        d[j] = z * z - 1.0;
    }
    d
}

/// Draw an action from the Gaussian policy.
pub fn sample_action(
    mean: &[f64; ACTION_DIM],
    std: &[f64; ACTION_DIM],
    rng: &mut impl Rng,
) -> [f64; ACTION_DIM] {
    let mut a = [0.0; ACTION_DIM];
    for j in 0..ACTION_DIM {
        let n: f64 = rng.sample(StandardNormal);
        a[j] = mean[j] + std[j] * n;
    }
    a
}
