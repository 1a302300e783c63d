#include "mimoee/parallel.hpp"

#include <omp.h>

namespace mimoee {

int max_threads() { return omp_get_max_threads(); }

}  // namespace mimoee
