// Timings of the node-parallel kernels against their serial reference paths.
// Both paths share the arithmetic per node, so outputs agree bitwise for
// maps; deterministic chunked reductions make sums thread-count independent.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "dsg/geometry.hpp"
#include "dsg/presets.hpp"
#include "dsg/solver.hpp"

using namespace dsg;
using clock_type = std::chrono::high_resolution_clock;

namespace {

template <class F>
double time_ms(int reps, F&& body) {
    // one warmup, then best of reps
    body();
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        body();
        const auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms   x%.2f\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    const int N = argc > 1 ? std::stoi(argv[1]) : 96;
    std::printf("atlas resolution %d, threads %d\n", N, max_threads());
    Atlas atlas(2, N);

    const Preset preset = parse_preset("random:7,0.08,3", 2);
    GraphFunction gf(atlas, 1.0);
    preset_field(atlas, preset, gf.u);
    atlas.sync(gf.u);

    Field d1(atlas, FieldKind::Covector), d2(atlas, FieldKind::Sym2), d3(atlas, FieldKind::Sym3);

    std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

    row("sync (scalar)",
        time_ms(5, [&] { atlas.sync(gf.u, Exec::Serial); }),
        time_ms(5, [&] { atlas.sync(gf.u, Exec::Parallel); }));

    row("jets d1+d2",
        time_ms(5, [&] { atlas.jets(gf.u, d1, d2, nullptr, Exec::Serial); }),
        time_ms(5, [&] { atlas.jets(gf.u, d1, d2, nullptr, Exec::Parallel); }));

    row("jets d1+d2+d3",
        time_ms(5, [&] { atlas.jets(gf.u, d1, d2, &d3, Exec::Serial); }),
        time_ms(5, [&] { atlas.jets(gf.u, d1, d2, &d3, Exec::Parallel); }));

    row("surface assembly",
        time_ms(3, [&] { assemble_surface(gf, Exec::Serial); }),
        time_ms(3, [&] { assemble_surface(gf, Exec::Parallel); }));

    row("quadrature",
        time_ms(5, [&] { (void)atlas.integrate(gf.u, Exec::Serial); }),
        time_ms(5, [&] { (void)atlas.integrate(gf.u, Exec::Parallel); }));

    // one damped Newton solve on a mildly varying prescription
    {
        Field psi(atlas, FieldKind::Scalar);
        psi.fill(2.0 * std::tanh(0.5) * std::tanh(0.5));
        GraphFunction u0(atlas, 1.0);
        u0.u.fill(0.4);
        SolverConfig cfg;
        cfg.tol = 1e-9;
        row("sigma2 solve (const psi)",
            time_ms(1, [&] { solve_sigma2(psi, 1.0, u0, cfg, Exec::Serial); }),
            time_ms(1, [&] { solve_sigma2(psi, 1.0, u0, cfg, Exec::Parallel); }));
    }

    // cross-check: identical output on both paths
    Field s1(atlas, FieldKind::Covector), s2(atlas, FieldKind::Sym2);
    atlas.jets(gf.u, s1, s2, nullptr, Exec::Serial);
    Field p1(atlas, FieldKind::Covector), p2(atlas, FieldKind::Sym2);
    atlas.jets(gf.u, p1, p2, nullptr, Exec::Parallel);
    double worst = 0.0;
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes)
            for (int k = 0; k < s2.ncomp; ++k)
                worst = std::max(worst, std::abs(s2.ptr(c, k)[q] - p2.ptr(c, k)[q]));
    std::printf("serial/parallel max deviation: %.3e\n", worst);
    return worst == 0.0 ? 0 : 1;
}
