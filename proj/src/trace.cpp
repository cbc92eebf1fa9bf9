#include "critjac/trace.hpp"

#include <stdexcept>
#include <string>

namespace critjac {

const Complex& SolutionTrace::u(Index k) const {
    if (!has(k)) throw std::out_of_range("trace has no u_" + std::to_string(k));
    return values[static_cast<std::size_t>(k - first_index)];
}

}  // namespace critjac
