#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pft/bogoliubov.hpp"
#include "pft/embedding.hpp"
#include "pft/evolve.hpp"
#include "pft/foliation.hpp"

namespace pft {

/// 17 significant digits, '.' decimal point regardless of locale.
std::string fmt(double v);

/// Columns index,x_label,T,X. A leading comment line carries the lattice and
/// wrap so that reading restores the embedding bit for bit.
void write_embedding_csv(std::ostream& os, const Embedding& e);
Embedding read_embedding_csv(std::istream& is);

/// Columns step,site,T,X,N,Nx. The lapse and shift of step k describe the
/// move from leaf k to leaf k+1; the final leaf repeats the last step's.
void write_foliation_csv(std::ostream& os, const Foliation& fol);

/// Columns site,mean_phi,mean_pi with pi the momentum density.
void write_state_csv(std::ostream& os, const GaussianState& s);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Columns j,k,re_alpha,im_alpha,re_beta,im_beta.
void write_bogoliubov_csv(std::ostream& os, const BogoliubovMap& m);

/// Writes `text` to `dir/name`, creating the directory.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace pft
