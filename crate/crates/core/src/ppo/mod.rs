//! Proximal policy optimization with a Gaussian actor and a value critic.

pub mod adam;
pub mod gae;
pub mod hyper;
pub mod loss;
pub mod mlp;
pub mod normalizer;
pub mod policy;
pub mod train;

pub use gae::compute_gae;
pub use hyper::PpoHyperparams;
pub use loss::{ppo_loss, LossCoefs, LossStats, Minibatch};
pub use mlp::Activation;
pub use policy::{PolicyBundle, PolicyNet, PpoAgent};
pub use train::{evaluate_policy, train, train_from, EvalRecord, TrainConfig, TrainError, TrainOutcome};
