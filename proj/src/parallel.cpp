#include "dol/parallel.hpp"

#include <omp.h>

namespace dol {

int max_threads() { return omp_get_max_threads(); }

}  // namespace dol
