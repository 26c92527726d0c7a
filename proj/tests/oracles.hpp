#pragma once

// Independent reference implementations used to cross-check the library.
// These deliberately avoid the code paths they verify.

#include <vector>

#include "dyncs/operator.hpp"
#include "dyncs/support_set.hpp"

namespace oracles {

using dyncs::Index;
using dyncs::Mat;
using dyncs::SupportSet;
using dyncs::Vec;

// per-column 2-norms by direct accumulation
Vec column_norms(const Mat& a);

// isometry constant by recursive subset enumeration + singular values
double ric(const Mat& a, Index s);

// max |<a_i, a_j>| over distinct columns (order-(1,1) orthogonality constant)
double pairwise_coherence(const Mat& a);

// normal-equations solve of min ||A_T b - y||
Vec pinv_normal_equations(const Mat& a, const std::vector<Index>& t, const Vec& y);

// does some size-s subset of v hold at least half the l1 mass? (sort and sum)
bool l1_half_concentrated(const Vec& v, Index s);

// smallest kept magnitude when sparsifying to `fraction` of the energy
double energy_alpha0(const Vec& v, double fraction);

// smallest addition threshold passing the sigma_min target, by exhaustive SVD
// scan over every candidate threshold level
double alpha_add_svd_scan(const Mat& a, const SupportSet& t_prev, const Vec& xhat,
                          double sigma_target);

// dense Kalman filter on a fixed support (the genie reference): returns the
// full-length mean trajectory, one vector per step
std::vector<Vec> genie_kf(const Mat& a_full, const std::vector<Index>& support,
                          const std::vector<Vec>& ys, double sigma_sys2, double sigma_sys02,
                          double sigma_obs2, const Vec& x0_full);

// scalar BPDN minimizer for m = n = 1, A = 1: soft threshold
double scalar_bpdn(double y, double gamma);

} // namespace oracles
