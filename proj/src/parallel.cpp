#include "ndde/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ndde {

int configure_threads() {
#ifdef NDDE_HAVE_OPENMP
    if (const char* env = std::getenv("NDDE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) omp_set_num_threads(n);
        } catch (const std::exception&) {
        }
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int max_threads() {
#ifdef NDDE_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace ndde
