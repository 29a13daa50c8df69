//! Multistage switch planning.
