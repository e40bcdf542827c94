// Serial vs parallel for each data-parallel kernel. Arg 0 = serial, 1 = parallel.

#include "ndde/criteria.hpp"
#include "ndde/integrator.hpp"
#include "ndde/operator.hpp"
#include "ndde/quadrature.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace ndde;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

AuxiliarySpec worked_aux() {
    return AuxiliarySpec(parse_expression("1/(t + 0.2)"), parse_expression("0.1/(t + 0.1)"), 0.0);
}

ProblemSpec worked_problem() {
    ProblemSpec pr;
    pr.form = Form::linear_neutral;
    pr.gamma = {1, 3};
    pr.b = parse_expression("sin(t)/7");
    pr.r1 = DelaySpec(parse_expression("0.2*t"));
    pr.r2 = pr.r1;
    pr.c = parse_expression("0.01*(0.8*t + 0.2)^(1/3)/((t + 0.1)*(t + 0.2))");
    pr.G = parse_expression("sin(x)", {Var::x});
    pr.a = bracket_coefficient(pr, worked_aux());
    return pr;
}

void BM_sup_scan(benchmark::State& state) {
    const CriterionModel model(worked_problem(), worked_aux(), 1e4);
    model.extend_to(1e4);
    auto h = [&](double t) { return model.term(1, t) + model.term(4, t); };
    for (auto _ : state) benchmark::DoNotOptimize(sup_scan(h, 0.0, 1e4, 4096, mode(state)));
    label(state);
}

void BM_cumulative_extend(benchmark::State& state) {
    QuadratureOptions opt;
    opt.execution = mode(state);
    for (auto _ : state) {
        CumulativeIntegral table([](double t) { return 0.1 / (t + 0.1) + std::sin(t) * std::sin(t); }, 0.0, 0.0, opt);
        table.extend_to(2e4);
        benchmark::DoNotOptimize(table.value(2e4));
    }
    label(state);
}

void BM_operator_apply(benchmark::State& state) {
    const SplitOperator op(worked_problem(), worked_aux(), HistoryFunction(Expression::constant(0.001), 0.0, 0.0),
                           200.0, 0.01, mode(state));
    const GridFunction z = op.candidate([](double t) { return 0.001 * std::cos(t); });
    for (auto _ : state) benchmark::DoNotOptimize(op.apply(z));
    label(state);
}

void BM_stability(benchmark::State& state) {
    const ProblemSpec pr = worked_problem();
    const auto family = default_history_family(0.00135, 0.0, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(stability_experiment(pr, 0.1, 0.00135, family, 200.0, {0.01}, mode(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_sup_scan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cumulative_extend)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_operator_apply)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    configure_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
