#pragma once
// Lindblad generators in the Schrodinger and Heisenberg pictures, and their
// vectorized (column-stacking) matrix form.

#include <string>
#include <vector>

#include "qstab/config.hpp"
#include "qstab/hilbert.hpp"

namespace qstab {

// Open system with identity scattering, Hamiltonian H and couplings L_k.
class SystemModel {
public:
    // `ladder_degree` is the polynomial degree of the couplings in a, a^dagger
    // (0 when unknown or not a truncated bosonic mode). It controls how many
    // top Fock levels are excluded from truncation-sensitive checks.
    SystemModel(Operator hamiltonian, std::vector<Operator> couplings, std::string label = {},
                int ladder_degree = 0, const Tolerances& tol = kDefaultTolerances);

    int dim() const noexcept { return static_cast<int>(hamiltonian_.rows()); }
    const Operator& hamiltonian() const noexcept { return hamiltonian_; }
    const std::vector<Operator>& couplings() const noexcept { return couplings_; }
    const std::string& label() const noexcept { return label_; }
    int ladder_degree() const noexcept { return ladder_degree_; }

    // Number of top levels corrupted by truncation in generator identities.
    int truncation_margin() const noexcept { return 2 * ladder_degree_; }

private:
    Operator hamiltonian_;
    std::vector<Operator> couplings_;
    std::string label_;
    int ladder_degree_ = 0;
};

enum class Picture { schrodinger, heisenberg };

const char* to_string(Picture p);

// Dense dim^2 x dim^2 matrix acting on column-stacked vec(X).
struct Superoperator {
    static constexpr const char* kConvention = "column-stacking";

    int dim = 0;
    Picture picture = Picture::schrodinger;
    Operator matrix;

    Operator apply(const Operator& x) const;
};

// L*(rho) = -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})
Operator schrodinger_generator(const SystemModel& model, const Operator& rho);
Operator schrodinger_generator(const SystemModel& model, const DensityOperator& rho);

// G(X) = -i[X, H] + sum_k (1/2 L^dag [X, L] + 1/2 [L^dag, X] L)
Operator heisenberg_generator(const SystemModel& model, const Operator& x);

// Builds the vectorized generator and spot-checks it against the direct
// formula on one random state.
Superoperator liouvillian_matrix(const SystemModel& model, Picture picture);

// Leading (dim - margin) x (dim - margin) block.
Operator interior_block(const Operator& x, int margin);

}  // namespace qstab
