//! Entity saliency in multilingual image captions.
//!
//! The pipeline runs in stages:
//!
//! 1. [`wordnet`] parses the WordNet noun database and applies ontology edits.
//! 2. [`inventory`] selects the root, explicit and implicit synsets.
//! 3. [`extraction`] maps caption noun phrases to inventory synsets.
//! 4. [`filtering`] drops synsets whose root is not visible in the image.
//! 5. [`analytics`] computes saliency tensors, distances and comparisons
//!    using the tests in [`stats`].

pub mod analytics;
pub mod error;
pub mod extraction;
pub mod filtering;
pub mod ingest;
pub mod inventory;
pub mod stats;
pub mod wordnet;

pub use error::{Error, ErrorClass, Result};
pub use extraction::{ExtractionResult, Extractor, FallbackScorer, RemoteScorer};
pub use filtering::FilteredResult;
pub use ingest::CaptionKey;
pub use inventory::{SynsetInventory, SynsetRole, Thresholds};
pub use stats::DistanceMatrix;
pub use wordnet::{Synset, SynsetId, SynsetTree};
