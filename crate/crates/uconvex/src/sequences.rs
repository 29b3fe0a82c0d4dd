//! t
