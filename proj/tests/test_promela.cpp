#include "doctest.h"
#include "promela_reference.hpp"
#include "spin_harness.hpp"
#include "support.hpp"

#include "wfv/checker.hpp"
#include "wfv/dsl.hpp"
#include "wfv/promela.hpp"

#include <algorithm>

using namespace wfv;
using namespace wfv::promela;
using namespace wfv::testing;

namespace {

Model compiled(const std::string& fixture, ObservationMode mode = ObservationMode::Flags)
{
    dsl::CompileOptions o;
    o.mode = mode;
    o.strict_spin = true;
    return dsl::compile_to_kernel(dsl::parse_workflow(read_file(fixture_path(fixture))), o);
}

} // namespace

TEST_CASE("library: send and recv definitions")
{
    auto lib = strip_trailing(emit_pattern_library());
    CHECK(lib.find(kSendDef) != std::string::npos);
    CHECK(lib.find(kRecvDef) != std::string::npos);
}

TEST_CASE("library: parallelSplit and exclusiveChoice definitions")
{
    auto lib = strip_trailing(emit_pattern_library());
    CHECK(lib.find(kParallelSplitDef) != std::string::npos);
    CHECK(lib.find(kExclusiveChoiceDef) != std::string::npos);
}

TEST_CASE("library: synchronization, cancelCase and simpleMerge")
{
    auto lib = emit_pattern_library();
    auto sync = lib.substr(lib.find("inline synchronization("));
    sync = sync.substr(0, sync.find("\n\n"));
    CHECK(sync.find("  S:\n") != std::string::npos);
    CHECK(sync.find("  E: skip;}") != std::string::npos);
    CHECK(sync.find("int aux[MAXARRAYSIZE];") != std::string::npos);
    CHECK(sync.find("aux[j]=0; j++;") != std::string::npos);
    CHECK(sync.find("::j==sizeq -> j=0; timeout;") != std::string::npos);
    CHECK(sync.find("goto S;") != std::string::npos);
    CHECK(lib.find("inline cancelCase(qsCancel, sizeq, piIds, msgs, id){") != std::string::npos);
    auto merge = lib.find("inline simpleMerge(");
    REQUIRE(merge != std::string::npos);
    CHECK(lib.rfind("Extra, not used by emitted models", merge) != std::string::npos);
}

TEST_CASE("library: MAXARRAYSIZE follows the configuration")
{
    CHECK(emit_pattern_library().find("#define MAXARRAYSIZE 16\n") != std::string::npos);
    EmitConfig c;
    c.max_array_size = 8;
    CHECK(emit_pattern_library(c).find("#define MAXARRAYSIZE 8\n") != std::string::npos);
}

TEST_CASE("model: golden global declarations")
{
    auto src = emit_model_source(compiled("travel_agency.wf"));
    CHECK(src.rfind("/* File with the translations of the workflow patterns. */\n#include \"utils.pr\"\n", 0) == 0);
    CHECK(contains_run(tokens(src), tokens(kGoldenDecls)));
    CHECK(src.find("int done[6];") != std::string::npos);
    auto scalar = emit_model_source(compiled("travel_agency.wf", ObservationMode::Scalar));
    CHECK(contains_run(tokens(scalar), tokens(kGoldenDecls)));
    CHECK(scalar.find("int s;") != std::string::npos);
    CHECK(scalar.find("done") == std::string::npos);
}

TEST_CASE("model: golden myRun dispatcher")
{
    auto src = emit_model_source(compiled("travel_agency.wf"));
    CHECK(tokens(proctype_text(src, "myRun")) == tokens(kGoldenMyRun));
}

TEST_CASE("model: golden proctypes in order with the pattern calls")
{
    auto src = emit_model_source(compiled("travel_agency.wf"));
    std::vector<std::size_t> at;
    for (const auto* name : {"myRun", "Book", "ChargeBuyer", "SendFailure", "BookFlight", "BookHotel"})
        at.push_back(src.find(std::string("proctype ") + name + "("));
    CHECK(std::find(at.begin(), at.end(), std::string::npos) == at.end());
    CHECK(std::is_sorted(at.begin(), at.end()));

    auto book = proctype_text(src, "Book");
    CHECK(book.find("run myRun(2,-1);") != std::string::npos);
    CHECK(book.find("run myRun(3,-1);") != std::string::npos);
    CHECK(book.find("parallelSplit(qs,2,") != std::string::npos);
    CHECK(book.find("synchronization(qs,2,msgs);") != std::string::npos);
    CHECK(book.find("} unless {") != std::string::npos);
    CHECK(book.find("len(qsCancel[1])>0;") != std::string::npos);
    CHECK(book.find("cancelCase(qsCancel,4,piIds,") != std::string::npos);
    CHECK(book.find("send(q2,1)") != std::string::npos);
    auto flight = proctype_text(src, "BookFlight");
    CHECK(flight.find("qs1[0]=qs[0];") != std::string::npos);
    CHECK(flight.find("qs1[1]=qsCancel[1];") != std::string::npos);
    CHECK(flight.find("exclusiveChoice(qs1,2,x,1)") != std::string::npos);
    CHECK(src.find("init{\n  atomic {") != std::string::npos);
    CHECK(src.find("piIds[0]=-1;") != std::string::npos);
}

TEST_CASE("model: empty workflow")
{
    auto m = dsl::compile_to_kernel(dsl::parse_workflow("workflow Empty { init { } }"), {ObservationMode::None});
    auto src = emit_model_source(m);
    CHECK(src.find("#include \"utils.pr\"") != std::string::npos);
    CHECK(src.find("init{\n  skip\n}\n") != std::string::npos);
}

TEST_CASE("model: emission is idempotent and every fixture emits")
{
    for (const auto* f : {"travel_agency.wf", "travel_agency_no_failure_notice.wf", "travel_agency_split_one.wf"})
        for (auto mode : {ObservationMode::Flags, ObservationMode::Scalar, ObservationMode::None}) {
            auto m = compiled(f, mode);
            CHECK(emit_model_source(m) == emit_model_source(m));
            CHECK(emit_property_file(m, "model.pml") == emit_property_file(m, "model.pml"));
        }
    CHECK(emit_pattern_library() == emit_pattern_library());
}

TEST_CASE("model: sizeq beyond MAXARRAYSIZE is rejected")
{
    EmitConfig c;
    c.max_array_size = 3;
    CHECK_THROWS_AS(emit_model_source(compiled("travel_agency.wf"), c), std::invalid_argument);
    c.max_array_size = 4;
    CHECK_NOTHROW(emit_model_source(compiled("travel_agency.wf"), c));
}

TEST_CASE("model: a declaring pattern used twice in one proctype is unsupported")
{
    auto def = dsl::parse_workflow(R"(workflow W {
  channels { qs[2]; }
  process P { parallel_split(qs, 2, 1); parallel_split(qs, 2, 1); }
  init { run P; }
})");
    auto m = dsl::compile_to_kernel(def, {ObservationMode::None});
    CHECK_THROWS_AS(emit_model_source(m), EmitUnsupported);

    auto clash = dsl::parse_workflow(R"(workflow W {
  channels { qs[2]; }
  process P { var n; parallel_split(qs, 2, 1); }
  init { run P; }
})");
    CHECK_THROWS_AS(emit_model_source(dsl::compile_to_kernel(clash, {ObservationMode::None})), EmitUnsupported);
}

TEST_CASE("model: array initialisers move into init")
{
    auto def = dsl::parse_workflow(R"(workflow W {
  var a[3] = {1, 2};
  var b[2] = {7, 7};
  var c = 4;
  init { }
})");
    auto src = emit_model_source(dsl::compile_to_kernel(def, {ObservationMode::None}));
    CHECK(src.find("int a[3];") != std::string::npos);
    CHECK(src.find("int b[2] = 7;") != std::string::npos);
    CHECK(src.find("int c = 4;") != std::string::npos);
    CHECK(src.find("a[0]=1;") != std::string::npos);
    CHECK(src.find("a[1]=2") != std::string::npos);
}

TEST_CASE("properties: defines and ltl blocks")
{
    auto ltl = emit_property_file(compiled("travel_agency.wf", ObservationMode::Scalar), "TravelAgency.pml");
    CHECK(ltl.rfind("#include \"TravelAgency.pml\"\n", 0) == 0);
    CHECK(ltl.find("#define p (s==0)\n#define q (s==1)\n#define r (s==2)\n"
                   "ltl objective { [] (p -> <> (q || r)) }\n#undef p\n") != std::string::npos);
    CHECK(ltl.find("#define p (s==4)\n#define q (s==5)\n#define r (s==1)\n"
                   "ltl response { [] ((p && q) -> <> (r)) }\n") != std::string::npos);
}

TEST_CASE("spin: emitted files are accepted and verdicts agree")
{
    if (!spin_bin()) {
        MESSAGE("SPIN_BIN not set; SPIN cross-check skipped");
        return;
    }
    for (const auto* f : {"travel_agency.wf", "travel_agency_no_failure_notice.wf", "travel_agency_split_one.wf"})
        for (auto mode : {ObservationMode::Flags, ObservationMode::Scalar}) {
            auto m = compiled(f, mode);
            auto dir = write_spin_files(std::string(f) + to_string(mode), emit_pattern_library(), emit_model_source(m),
                                        emit_property_file(m, "model.pml"));
            CHECK(spin_accepts(dir, "model.pml") == true);
            CHECK(spin_accepts(dir, "model.ltl") == true);
            Program p(m);
            auto deadlock = checker::check_deadlock(p);
            auto errors = spin_deadlock_errors(dir);
            REQUIRE(errors);
            CHECK_MESSAGE((*errors > 0) == (deadlock.outcome == checker::Outcome::Deadlock), f);
            for (const auto& prop : m.properties)
                for (bool fair : {false, true}) {
                    checker::CheckOptions o;
                    o.fair = fair;
                    auto v = checker::check_property(p, prop, o);
                    auto e = spin_ltl_errors(dir, prop.name, fair);
                    REQUIRE(e);
                    CHECK_MESSAGE((*e > 0) == (v.outcome == checker::Outcome::Violated), f << " " << prop.name);
                }
        }
}
