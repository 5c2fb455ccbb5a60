//! Speech emotion recognition toolkit.
//!
//! `serkit` turns WAV audio into MFCC-based utterance features and classifies
//! seven emotions (angry, disgust, fear, happy, neutral, sad, surprise) with a
//! divide-and-conquer cascade of classifiers:
//!
//! 1. **Stage 1** separates *neutral* from *emotional* speech and exits early
//!    on neutral.
//! 2. **Stage 2** splits emotional speech into *positive* and *negative*.
//! 3. **Stage 3** resolves positive into {happy, surprise} and negative into
//!    {angry, disgust, fear, sad}.
//!
//! Exactly four models are trained (one per stage branch), each a decision
//! tree, random forest, or RBF support-vector machine built from scratch in
//! [`learners`]. A single flat seven-class model with the same learner
//! configuration serves as the baseline, and [`eval`] reports confusion
//! matrices, per-stage accuracies, and macro accuracy for both.
//!
//! All numeric paths are generic over the [`num::Real`] scalar; the aliases
//! at the crate root pin `f64`, which is what the `serkit` CLI uses. Every
//! seeded operation (corpus synthesis, splits, forest and SMO training) is
//! deterministic: the same inputs and seeds produce identical bytes.

pub mod cascade;
pub mod corpus;
pub mod eval;
pub mod learners;
pub mod mfcc;
pub mod num;

pub use num::Real;

/// Double-precision audio clip, as used by the CLI.
pub type AudioClip64 = corpus::AudioClip<f64>;
/// Single-precision audio clip.
pub type AudioClip32 = corpus::AudioClip<f32>;
/// Double-precision MFCC frame matrix.
pub type MfccMatrix64 = mfcc::MfccMatrix<f64>;
/// Double-precision utterance feature vector.
pub type UtteranceFeatures64 = mfcc::UtteranceFeatures<f64>;
/// Double-precision labeled feature table.
pub type FeatureSet64 = mfcc::FeatureSet<f64>;
/// Double-precision trained single model.
pub type TrainedModel64 = learners::TrainedModel<f64>;
/// Double-precision cascade model.
pub type CascadeModel64 = cascade::CascadeModel<f64>;
