//! Feature-based scorers: the transition classifier and the arc scorer.

pub mod arc_model;
pub mod features;
pub mod io;
pub mod transition_model;

pub use arc_model::{score_arcs, train_arc_scorer_crf, ArcScorerModel, CrfObjective, CrfTrainConfig};
pub use features::{arc_features, extract_state_features, FeatureVector, View, ViewConfig};
pub use transition_model::{
    classify_transition, parse_greedy, train_transition_classifier, TransitionModel,
    TransitionTrainConfig,
};
