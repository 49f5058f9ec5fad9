#include <benchmark/benchmark.h>

#include "eitlab/boundary_ops.hpp"
#include "eitlab/conductivity.hpp"
#include "eitlab/electrodes.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/linalg.hpp"
#include "eitlab/mesh.hpp"

using namespace eitlab;

static void BM_DiskMesh(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_disk_mesh(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DiskMesh)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_Stiffness(benchmark::State& state)
{
    const Mesh m = generate_disk_mesh(static_cast<int>(state.range(0)));
    const ConductivityField a = constant_tensor(m, 1.0, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_stiffness(m, a));
    state.counters["triangles"] = static_cast<double>(m.num_triangles());
}
BENCHMARK(BM_Stiffness)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_NeumannFactor(benchmark::State& state)
{
    const Mesh m = generate_disk_mesh(static_cast<int>(state.range(0)));
    const ConductivityField a = constant_tensor(m, 1.0, 2.0);
    for (auto _ : state)
        NeumannSolver s(m, a);
}
BENCHMARK(BM_NeumannFactor)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_AssembleND(benchmark::State& state)
{
    const Mesh m = generate_disk_mesh(static_cast<int>(state.range(0)));
    const BoundaryBasis basis(m, 8);
    const ConductivityField a = constant_tensor(m, 1.0, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_nd(m, a, basis));
}
BENCHMARK(BM_AssembleND)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

static void BM_DistanceL2L2(benchmark::State& state)
{
    const Mesh m = generate_disk_mesh(5);
    const BoundaryBasis basis(m, static_cast<int>(state.range(0)));
    const BoundaryOperator p = assemble_nd(m, scalar_field(m, 1.0), basis);
    const BoundaryOperator q = assemble_nd(m, constant_tensor(m, 1.0, 2.0), basis);
    for (auto _ : state)
        benchmark::DoNotOptimize(op_distance_l2l2(p, q));
}
BENCHMARK(BM_DistanceL2L2)->Arg(4)->Arg(8);

static void BM_CemResistance(benchmark::State& state)
{
    const Mesh m = generate_disk_mesh(static_cast<int>(state.range(0)));
    const ConductivityField a = scalar_field(m, 1.0);
    const ElectrodeConfig e = equal_electrodes(8, 0.3, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(resistance_matrix(m, a, e));
}
BENCHMARK(BM_CemResistance)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
