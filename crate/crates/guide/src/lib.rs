//! The guide chapters, compiled so their examples run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/transduction.md")]
pub mod transduction {}
#[doc = include_str!("../../../book/src/dialogue.md")]
pub mod dialogue {}
#[doc = include_str!("../../../book/src/feedback.md")]
pub mod feedback {}
#[doc = include_str!("../../../book/src/analytics.md")]
pub mod analytics {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/sessions.md")]
pub mod sessions {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
