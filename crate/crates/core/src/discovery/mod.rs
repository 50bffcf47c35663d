//! Mining conversation-flow structure from event logs.

mod episodes;
mod graph;
mod succession;

pub use episodes::{mine_episodes, mine_episodes_with, EpisodeOptions, EpisodePattern, SupportMode, DEFAULT_MAX_EPISODE_LEN};
pub use graph::{directly_follows, extract_model, extract_model_with, EdgeThreshold, TransitionGraph};
pub use succession::{mine_succession, LabelOccurrences, SuccessionPair, SuccessionStats};
