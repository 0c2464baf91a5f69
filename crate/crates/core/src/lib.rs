//! Topic-trend mining over preprint corpora.

pub mod evalmetrics;
pub mod harvest;
pub mod insight;
pub mod textprep;
pub mod phrasemine;
pub mod vectorize;
pub mod cluster;
pub mod entities;
pub mod pipeline;
pub mod sample;
