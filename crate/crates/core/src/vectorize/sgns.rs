//! Skip-gram negative-sampling objective.
//!
//! For an input vector `h`, a positive output `v+` and negatives `v-_k`:
//! `L = -ln σ(h·v+) - Σ_k ln σ(-h·v-_k)`.

use num_traits::Float;

pub fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `dL/d(h·v)` for one output row: `σ(h·v) - 1` for the positive, `σ(h·v)` for a negative.
pub fn output_coefficient<F: Float>(input: &[F], output: &[F], positive: bool) -> F {
    let s = sigmoid(dot(input, output));
    if positive {
        s - F::one()
    } else {
        s
    }
}

pub fn sgns_loss<F: Float>(input: &[F], positive: &[F], negatives: &[&[F]]) -> F {
    let pos = -sigmoid(dot(input, positive)).ln();
    negatives
        .iter()
        .fold(pos, |acc, neg| acc - sigmoid(-dot(input, neg)).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients<F> {
    pub input: Vec<F>,
    pub positive: Vec<F>,
    pub negatives: Vec<Vec<F>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every vector involved.
pub fn sgns_gradients<F: Float>(input: &[F], positive: &[F], negatives: &[&[F]]) -> SgnsGradients<F> {
    let mut grad_input = vec![F::zero(); input.len()];
    let mut accumulate = |output: &[F], is_pos: bool| -> Vec<F> {
        let g = output_coefficient(input, output, is_pos);
        for (gi, &o) in grad_input.iter_mut().zip(output) {
            *gi = *gi + g * o;
        }
        input.iter().map(|&h| g * h).collect()
    };
    let grad_pos = accumulate(positive, true);
    let grad_negs = negatives.iter().map(|n| accumulate(n, false)).collect();
    SgnsGradients {
        input: grad_input,
        positive: grad_pos,
        negatives: grad_negs,
    }
}
