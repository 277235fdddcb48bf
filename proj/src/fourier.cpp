#include "eeqt/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace eeqt {

namespace {

// FFTW plan creation is not thread safe; execution of distinct plans is.
std::mutex plan_mutex;

struct Workspace {
    int n = 0;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;

    explicit Workspace(int size) : n(size) {
        std::lock_guard<std::mutex> lock(plan_mutex);
        buf = fftw_alloc_complex(static_cast<size_t>(4) * n);
        int dims[1] = {n};
        // 4 interleaved transforms: component c has stride 4, offset c.
        fwd = fftw_plan_many_dft(1, dims, 4, buf, nullptr, 4, 1, buf, nullptr, 4, 1,
                                 FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_many_dft(1, dims, 4, buf, nullptr, 4, 1, buf, nullptr, 4, 1,
                                 FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Workspace() {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
};

Workspace& workspace_for(int n) {
    thread_local std::map<int, std::unique_ptr<Workspace>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Workspace>(n)).first;
    return *it->second;
}

}  // namespace

void spectral_propagate(std::vector<cplx>& values, int n, double dx, double mhat, double dt) {
    if (dt == 0.0) return;
    Workspace& ws = workspace_for(n);
    auto* buf = reinterpret_cast<cplx*>(ws.buf);
    std::copy(values.begin(), values.end(), buf);
    fftw_execute(ws.fwd);

    const double dk = 2.0 * std::numbers::pi / (n * dx);
    const double inv_n = 1.0 / n;
    for (int j = 0; j < n; ++j) {
        const double k = dk * (j <= n / 2 ? j : j - n);
        const double e = std::sqrt(k * k + mhat * mhat);
        const double c = std::cos(e * dt);
        const double s = std::sin(e * dt) / e;
        // exp(-i dt H) on the (0,3) and (1,2) pairs, H = [[mhat, k], [k, -mhat]].
        const cplx a(c, -s * mhat);
        const cplx d(c, s * mhat);
        const cplx b(0.0, -s * k);
        cplx* p = buf + 4 * static_cast<size_t>(j);
        const cplx f0 = p[0], f1 = p[1], f2 = p[2], f3 = p[3];
        p[0] = (a * f0 + b * f3) * inv_n;
        p[3] = (b * f0 + d * f3) * inv_n;
        p[1] = (a * f1 + b * f2) * inv_n;
        p[2] = (b * f1 + d * f2) * inv_n;
    }

    fftw_execute(ws.bwd);
    std::copy(buf, buf + values.size(), values.begin());
}

}  // namespace eeqt
