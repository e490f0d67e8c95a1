// Walks one coupling value through every solver and prints the energies side by side.
//   ./sample_bound_states [delta] [omega]

#include <cstdio>
#include <cstdlib>

#include "ebs/ed_oracle.hpp"
#include "ebs/exact_fewbody.hpp"
#include "ebs/perturbative.hpp"
#include "ebs/sebs.hpp"
#include "ebs/variational.hpp"

int main(int argc, char** argv) {
  using namespace ebs;
  const double delta = argc > 1 ? std::atof(argv[1]) : 0.0;
  const double omega = argc > 2 ? std::atof(argv[2]) : 0.5;
  const ImpuritySpec imp{delta, omega};
  const LatticeGrid ring{1, 41, Boundary::periodic};

  auto bath = tight_binding_1d();
  auto infinite = SpectralContext::automatic(bath);
  SpectralContext finite(bath, LatticeSum{ring});

  try {
    auto s = solve_sebs(infinite, imp);
    std::printf("single excitation   E1 = %.12f  u_B^2 = %.6f  xi = %.4f\n", s.E1, s.u_B * s.u_B, s.xi);

    auto modes = diagonalize_single(infinite, imp, ring);
    auto two = solve_two_body(modes);
    auto three = solve_three_body(modes);
    std::printf("exact, L = 41       E2 = %.12f  E3 = %.12f\n", two.E2, three.E3);

    for (int n : {2, 3, 4}) {
      auto v = optimize(finite, imp, n);
      auto g = ground_state(infinite, imp, ring, n);
      std::printf("N = %d  variational %.10f  ED %.10f  gap %.2e  jc %.6f\n", n, v.EN, g.energy, v.EN - g.energy,
                  jc_energy(imp, n));
    }
  } catch (const Error& e) {
    std::printf("solver error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  }
}
