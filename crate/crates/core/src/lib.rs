//! Numerical toolkit for multi-order Sobolev norms, uniformly local (Kato)
//! norms, and holomorphic functional calculus on a discretized torus.
//!
//! The torus `[-L/2, L/2)^n` with a uniform grid stands in for `R^n`:
//! fields are assumed to be supported well inside the box (or periodic by
//! construction), so the periodic discrete Fourier transform approximates
//! the continuum Fourier integral.  On top of the grid layer the crate
//! provides
//!
//! * anisotropic Bessel weights `<<xi>>^s` over a block decomposition of the
//!   frequency variables, together with Peetre-type inequalities and weighted
//!   convolution bounds ([`weights`]),
//! * Sobolev norms, Bessel multipliers, spectral derivatives and de-aliased
//!   pointwise products ([`sobolev`]),
//! * smooth partitions of unity subordinate to the unit lattice, lattice
//!   decompositions of a field and almost-orthogonality checks
//!   ([`partition`]),
//! * uniformly local `K_p^s` norms taken over translated windows and the
//!   equivalences relating them to the global Sobolev norm ([`kato`]),
//! * mollifiers, a polydisc contour realization of the holomorphic
//!   functional calculus (composition, inversion, division, spectra) and
//!   chain-rule diagnostics ([`calculus`]),
//! * machine-readable verification reports and the named suites exposed by
//!   the `ks` command line tool ([`report`], [`suites`]).

pub mod calculus;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kato;
pub mod partition;
pub mod report;
pub mod sobolev;
pub mod suites;
pub mod testfields;
pub mod weights;

pub use error::{KsError, Result};
pub use grid::{Domain, GridSpec, SampledField};
