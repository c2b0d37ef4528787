#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "phi4/core.hpp"

namespace phi4 {
namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plans are created once per shape under a lock; execution via the new-array
// interface is thread safe.
const PlanPair& plans_for(int dim, int N) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(dim, N);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    int n[3] = {N, N, N};
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(N);
    fftw_complex* a = fftw_alloc_complex(total);
    fftw_complex* b = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.fwd = fftw_plan_dft(dim, n, a, b, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft(dim, n, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
    return cache.emplace(key, p).first->second;
}

}  // namespace

void forward_real(const LatticeSpec& lat, const double* in, cplx* out) {
    const std::size_t np = lat.points();
    std::vector<cplx> buf(np);
    for (std::size_t i = 0; i < np; ++i) buf[i] = cplx(in[i], 0.0);
    const auto& p = plans_for(lat.dim, lat.N);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(buf.data()), reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / static_cast<double>(np);
    for (std::size_t i = 0; i < np; ++i) out[i] *= s;
}

void inverse_real(const LatticeSpec& lat, const cplx* in, double* out) {
    const std::size_t np = lat.points();
    std::vector<cplx> a(in, in + np), b(np);
    const auto& p = plans_for(lat.dim, lat.N);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(a.data()), reinterpret_cast<fftw_complex*>(b.data()));
    for (std::size_t i = 0; i < np; ++i) out[i] = b[i].real();
}

}  // namespace phi4
