//! Java source analysis: lexing, structural parsing and the feature vector.

pub mod catalog;
mod features;
pub mod lexer;
pub mod parser;

pub use features::{
    classify_guideline_category, extract_features, Extraction, Feature, FeatureExtractor, FeatureVector,
    GuidelineCategory, FEATURE_COUNT, FEATURE_NAMES,
};
