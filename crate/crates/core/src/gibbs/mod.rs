//! Rank-likelihood Gibbs sampler.

mod blocks;
mod chain;
mod rank;
mod storage;

pub use blocks::{
    accept_var_proposal, draw_factors, draw_global_scales, draw_latent_cell, draw_loadings,
    draw_local_scales, draw_stable_mniw, draw_var_block, draw_var_copula_cell, draw_variances,
    global_scale_rate, global_scale_shape, loading_posterior, log_initial_density,
    state_space_spec, var_posterior, variance_rates, VarNeighbourPrecisions, VarPosterior,
};
pub use chain::{
    gibbs_sweep, initial_state, mid_ranks, normal_scores, run_chain, run_single_chain,
    ChainDiagnostics, LatentState, McmcConfig, ModelKind, PosteriorDraw, PosteriorDraws,
};
pub use rank::{compute_rank_bounds, respects_ranks, RankStructure};
pub use storage::{read_draws, read_draws_from, write_draws, write_draws_to};
