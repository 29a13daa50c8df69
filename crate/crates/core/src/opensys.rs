//! Open-cavity dynamics.
