// avlab: batch front end over the header library. Every report starts with
// "avlab <command> <action> <version>"; diagnostics go to stderr only.

#include "CLI11.hpp"
#include "avlab/forcing.hpp"
#include "avlab/io.hpp"
#include "avlab/levin_zvonkin.hpp"
#include "avlab/reductions.hpp"
#include "avlab/series.hpp"
#include "avlab/weights.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#ifndef AVLAB_VERSION
#define AVLAB_VERSION "dev"
#endif

using namespace avlab;

namespace {

struct RunConfig {
    long k = 32;
    std::size_t N = 64;
    std::uint64_t s = 1000;
    std::uint64_t seed = 1;
};

void header(const std::string& cmd, const std::string& action) {
    std::cout << "avlab " << cmd << " " << action << " " << AVLAB_VERSION << "\n";
}

void check_config(const RunConfig& c) {
    if (c.k <= 0 || c.N == 0 || c.s == 0) throw precondition_error("precision, horizon and budget must be positive");
}

std::string read_text(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

Bits load_bits(const std::string& p) { return read_file(p, [](std::istream& in) { return read_bits(in); }); }
Nats load_nats(const std::string& p) { return read_file(p, [](std::istream& in) { return read_nats(in); }); }
BadSet load_bad(const std::string& p, const BoundFamily& h) {
    return read_file(p, [&](std::istream& in) { return read_bad_set(in, h); });
}

Nats parse_word(const std::string& s) {
    std::istringstream in(s);
    Nats w;
    std::string tok;
    while (in >> tok) {
        if (tok.find_first_not_of("0123456789") != std::string::npos) throw domain_error("bad letter '" + tok + "' in word");
        w.push_back(Nat(tok));
    }
    return w;
}

std::vector<Bits> bits_lines(const std::string& path) {
    std::istringstream in(read_text(path));
    std::vector<Bits> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::istringstream one(line);
        std::string w;
        if (!(one >> w)) continue;
        if (!is_bits(w)) throw format_error("not a bit string: '" + w + "'", n, path);
        out.push_back(w);
    }
    return out;
}

// Closures every K_s query sees: 1^k0 -> 0^{2^k}, 1^k0 -> 1^{2^k} (k <= 16),
// then literal printers for lengths 1..16. Even indices are counter programs.
ProgramRegistry desk_registry() {
    ProgramRegistry reg;
    for (char c : {'0', '1'}) {
        reg.register_closure(std::string("repeat-") + c, [c](const Nat& x) -> std::optional<Conv> {
            Bits r = str_decode(x);
            if (r.empty() || r.back() != '0' || r.size() > 17) return std::nullopt;
            for (std::size_t i = 0; i + 1 < r.size(); ++i)
                if (r[i] != '1') return std::nullopt;
            return Conv{str_encode(Bits(std::size_t{1} << (r.size() - 1), c)), 0};
        });
    }
    for (std::size_t n = 1; n <= 16; ++n) register_literal_printer(reg, n);
    return reg;
}

Coefficients coefficients_named(const std::string& a) {
    if (a == "sqrt") return sqrt_coefficients();
    if (a == "sqrt-adjusted") return adjusted(sqrt_coefficients());
    throw domain_error("unknown coefficient sequence '" + a + "' (sqrt, sqrt-adjusted)");
}

void print_plan(const ProgressionMap& P) {
    std::cout << "coefficients " << P.coefficients << "\n";
    std::cout << "m0 " << P.m0 << "\n";
    for (std::size_t s = 0; s < P.stages.size(); ++s) {
        const auto& st = P.stages[s];
        std::cout << "stage " << s << " mod 2^" << st.m << " count " << st.offsets.size() << " offsets";
        for (std::size_t j = 0; j < st.offsets.size() && j < 32; ++j) std::cout << " " << st.offsets[j];
        if (st.offsets.size() > 32) std::cout << " ...";
        std::cout << "\n";
    }
    std::cout << "coverage " << P.coverage(P.stages.size()) << "\n";
}

// ---------------------------------------------------------------------------

void add_series(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("series", "classify sum 1/p or bracket it")->require_subcommand(1);
    static std::string expr;
    auto* cl = cmd->add_subcommand("classify", "FastGrowing / SlowGrowing with certificate");
    cl->add_option("expr", expr, "order-function expression")->required();
    cl->callback([&] {
        header("series", "classify");
        GrowthClass c = classify(parse_order_fn(expr), Nat(static_cast<unsigned long>(cfg.N)));
        std::cout << "subject " << parse_order_fn(expr).str() << "\n";
        std::cout << "class " << tag_name(c.tag) << "\n";
        std::cout << "certificate " << c.certificate << "\n";
    });
    auto* sm = cmd->add_subcommand("sum", "bracket of sum 1/p(n) of width <= 2^-k");
    sm->add_option("expr", expr, "order-function expression")->required();
    sm->callback([&] {
        header("series", "sum");
        SeriesReport r = series_report(parse_order_fn(expr), cfg.k);
        std::cout << "subject " << r.subject << "\n";
        std::cout << "class " << tag_name(r.cls.tag) << "\n";
        std::cout << "method " << method_name(r.method) << "\n";
        if (!r.bracket) {
            if (r.cls.tag == GrowthClass::SlowGrowing) {
                std::cout << "sum diverges\n";
                return;
            }
            throw indeterminate("no certified tail for " + r.subject);
        }
        std::cout << "bracket " << r.bracket->str() << "\n";
        std::cout << "precision " << r.precision << "\n";
    });
}

void add_orderfn(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("orderfn", "evaluate and check order functions")->require_subcommand(1);
    static std::string expr, at;
    auto* ev = cmd->add_subcommand("eval", "bracket and floor of f(n)");
    ev->add_option("expr", expr)->required();
    ev->add_option("n", at)->required();
    ev->callback([&] {
        header("orderfn", "eval");
        OrderFn f = parse_order_fn(expr);
        Nat n(at);
        DyadInterval v = eval_at(f, n, cfg.k);
        Nat fl = floor_at(f, n);
        std::cout << "f " << f.str() << "\n";
        std::cout << "value " << v.str() << "\n";
        std::cout << "floor " << fl << "\n";
    });
    auto* inv = cmd->add_subcommand("inverse", "least n with f(n) >= x");
    inv->add_option("expr", expr)->required();
    inv->add_option("x", at)->required();
    inv->callback([&] {
        header("orderfn", "inverse");
        OrderFn f = parse_order_fn(expr);
        Nat n = generalized_inverse(f, parse_rat(at));
        std::cout << "f " << f.str() << "\n";
        std::cout << "inverse " << n << "\n";
    });
    auto* cv = cmd->add_subcommand("convex", "f(n+1) - f(n) <= 1 below the horizon");
    cv->add_option("expr", expr)->required();
    cv->callback([&] {
        header("orderfn", "convex");
        OrderFn f = parse_order_fn(expr);
        CheckResult r = check_convex(f, Nat(static_cast<unsigned long>(cfg.N)));
        std::cout << "f " << f.str() << "\n";
        std::cout << "convex " << (r.pass ? "pass" : "fail") << "\n";
        if (!r.pass) std::cout << "at " << r.at << "\n";
        std::cout << "note " << r.note << "\n";
    });
}

void add_weights(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("weights", "weights of sets of strings and prefix codes")->require_subcommand(1);
    static std::string file, h_expr = "2", g_expr = "id", alpha = "1/2";
    static std::size_t q = 4;
    static bool decode = false;
    for (auto name : {"dwt", "pwt"}) {
        auto* w = cmd->add_subcommand(name, std::string(name) + " of the words in a bad-set file");
        w->add_option("file", file)->required();
        w->add_option("--bound", h_expr, "alphabet bound");
        w->add_option("--g", g_expr, "weight exponent by length");
        w->callback([&cfg, name = std::string(name)] {
            header("weights", name);
            BoundFamily h = family_of(parse_order_fn(h_expr));
            BadSet B = load_bad(file, h);
            WeightedSet S{std::vector<Nats>(B.strings.begin(), B.strings.end()), h, weight_by_length(parse_order_fn(g_expr))};
            DyadInterval v = name == "dwt" ? dwt(S, cfg.k) : pwt(S, cfg.k);
            std::cout << "strings " << S.strings.size() << "\n";
            std::cout << name << " " << v.str() << "\n";
        });
    }
    auto* kr = cmd->add_subcommand("kraft", "prefix-freeness and Kraft sum of codes, one per line");
    kr->add_option("file", file)->required();
    kr->callback([] {
        header("weights", "kraft");
        auto codes = bits_lines(file);
        KraftResult r = kraft_check(codes);
        std::cout << "codes " << codes.size() << "\n";
        if (r.ok) {
            std::cout << "kraft ok\nslack " << r.slack << "\n";
        } else {
            std::cout << "kraft fail " << r.reason << "\n";
            if (r.reason == "compatible pair") std::cout << "pair " << r.clash.first << " " << r.clash.second << "\n";
        }
    });
    auto* kc = cmd->add_subcommand("kc", "online leftmost-fit code allocation for a length file");
    kc->add_option("file", file)->required();
    kc->callback([] {
        header("weights", "kc");
        Nats ds = load_nats(file);
        std::vector<std::size_t> lengths;
        for (auto& d : ds) lengths.push_back(to_size(d));
        CodeAllocation a = kc_allocate(lengths);
        for (std::size_t i = 0; i < a.codes.size(); ++i) std::cout << lengths[i] << " " << a.codes[i] << "\n";
    });
    auto* sp = cmd->add_subcommand("sparse", "sparse-block code of a .bits file");
    sp->add_option("file", file)->required();
    sp->add_option("--q", q, "block length");
    sp->add_option("--alpha", alpha, "index width per block bit");
    sp->add_flag("--decode", decode);
    sp->callback([] {
        header("weights", decode ? "sparse-decode" : "sparse");
        Bits in = load_bits(file);
        Rat a = parse_rat(alpha);
        if (decode) {
            Bits out = sparse_decode(in, q, a);
            std::cout << "length " << out.size() << "\n";
            write_bits(std::cout, out);
            return;
        }
        auto out = sparse_encode(in, q, a);
        if (!out) throw domain_error("too many distinct blocks for the dictionary");
        std::cout << "length " << out->size() << " bound " << sparse_length(in.size(), q, a) << "\n";
        write_bits(std::cout, *out);
    });
}

void add_machine(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("machine", "counter programs, K_s and the monotone machine")->require_subcommand(1);
    static std::string file, input = "0", sigma;
    static std::size_t h = 2, depth = 3, stages = 8;
    auto* run = cmd->add_subcommand("run", "run a counter program on one input for s steps");
    run->add_option("file", file)->required();
    run->add_option("x", input);
    run->callback([&] {
        header("machine", "run");
        Program p = parse_program(read_text(file));
        std::cout << "index " << program_index(p) << "\n";
        auto r = run_program(p, Nat(input), cfg.s);
        if (r) std::cout << "value " << r->value << "\nsteps " << r->steps << "\n";
        else std::cout << "no convergence within " << cfg.s << " steps\n";
    });
    auto* kb = cmd->add_subcommand("kbound", "K_s upper bound for a bit string over the desk registry");
    kb->add_option("sigma", sigma)->required();
    kb->callback([&] {
        header("machine", "kbound");
        if (!is_bits(sigma)) throw domain_error("sigma must be a bit string");
        ProgramRegistry reg = desk_registry();
        UniversalMachine U(reg, cfg.s);
        auto k = U.k_bound(sigma);
        std::cout << "stage " << cfg.s << "\n";
        if (k) std::cout << "kbound " << *k << "\n";
        else std::cout << "kbound none\n";
    });
    auto* lz = cmd->add_subcommand("lz", "monotone machine for a seeded random staged semimeasure");
    lz->add_option("--alphabet", h, "constant alphabet size");
    lz->add_option("--depth", depth);
    lz->add_option("--stages", stages);
    lz->callback([&] {
        header("machine", "lz");
        std::mt19937_64 rng(cfg.seed);
        BoundFamily fam = BoundFamily::constant(Nat(static_cast<unsigned long>(h)));
        StagedSemimeasure nu = random_staged(fam, stages, depth, rng);
        for (std::size_t s = 0; s < nu.stages(); ++s) {
            const auto& e = nu.events()[s];
            std::cout << "event " << s;
            if (e) std::cout << " " << show(e->sigma) << " +" << e->n << "/2^" << s + 1;
            std::cout << "\n";
        }
        MonotoneMachineTable M = lz_build(nu, nu.stages());
        for (auto& p : M.pairs) std::cout << "pair " << (p.tau.empty() ? "-" : p.tau) << " " << show(p.sigma) << " stage " << p.stage << "\n";
        for (auto& w : nu.support())
            std::cout << "check " << show(w) << " nu " << nu.value(w, nu.stages()) << " machine " << machine_semimeasure(M, w) << "\n";
    });
}

void add_bushy(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("bushy", "bushy-tree combinatorics and forcing replays")->require_subcommand(1);
    static std::string file, stem, h_expr = "2", p2_expr = "exp2 affine 1 1", psi_file;
    static std::size_t k = 2, n1 = 1, depth = 8, stages = 3;
    static bool check_idem = false;
    auto* big = cmd->add_subcommand("is-big", "is the bad set k-big above the stem");
    big->add_option("file", file)->required();
    big->add_option("--stem", stem, "letters separated by spaces");
    big->add_option("-b,--bushiness", k);
    big->add_option("--bound", h_expr, "alphabet bound");
    big->callback([] {
        header("bushy", "is-big");
        BoundFamily h = family_of(parse_order_fn(h_expr));
        BadSet B = load_bad(file, h);
        Nats s = parse_word(stem);
        std::cout << "stem " << show(s) << " bushiness " << k << "\n";
        std::cout << (is_big(B, s, k) ? "big" : "small") << "\n";
    });
    auto* cl = cmd->add_subcommand("closure", "minimal members of the k-closure");
    cl->add_option("file", file)->required();
    cl->add_option("-b,--bushiness", k);
    cl->add_option("--bound", h_expr, "alphabet bound");
    cl->add_flag("--check-idempotent", check_idem);
    cl->callback([] {
        header("bushy", "closure");
        BoundFamily h = family_of(parse_order_fn(h_expr));
        BadSet C = closure(load_bad(file, h), k);
        write_bad_set(std::cout, C);
        if (check_idem) {
            BadSet CC = closure(C, k);
            bool same = CC.within(C) && C.within(CC);
            std::cout << "idempotent " << (same ? "pass" : "fail") << "\n";
            if (!same) throw std::logic_error("closure is not idempotent");
        }
    });
    auto* fr = cmd->add_subcommand("forcing", "replay the avoidance forcing with empty targets");
    fr->add_option("--bound", p2_expr, "bound p2");
    fr->add_option("--psi", psi_file, ".nat file: psi2(n) on line n");
    fr->add_option("--n1", n1);
    fr->add_option("--depth", depth);
    fr->add_option("--stages", stages);
    fr->callback([] {
        header("bushy", "forcing");
        BoundFamily p2 = family_of(parse_order_fn(p2_expr));
        std::map<std::size_t, Nat> psi;
        if (!psi_file.empty()) {
            Nats v = load_nats(psi_file);
            for (std::size_t i = 0; i < v.size(); ++i) psi[i] = v[i];
        }
        for (auto& st : forcing_step4(p2, {}, psi, n1, depth, stages)) std::cout << st.trace << "\n";
    });
    (void)cfg;
}

void add_transform(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("transform", "the explicit reductions on files")->require_subcommand(1);
    static std::string in, out, f_expr = "id", h_expr = "id", p_expr = "exp2", a_name = "sqrt";
    static std::optional<std::size_t> count;
    static std::size_t stages = 3, m = 4, ra = 1, rb = 0;
    static std::uint64_t kmod = 0;
    static std::string fill = "0";
    static bool push = false;
    auto files = [](CLI::App* c) {
        c->add_option("in", in)->required();
        c->add_option("out", out)->required();
    };
    auto* c2l = cmd->add_subcommand("c2l", "Y(n) = #(X restricted to (f^- o h)(n))");
    files(c2l);
    c2l->add_option("--f", f_expr);
    c2l->add_option("--bound", h_expr, "alphabet bound");
    c2l->add_option("--count", count, "values to emit (default: as many as the input allows)");
    c2l->callback([&] {
        header("transform", "c2l");
        Bits X = load_bits(in);
        OrderFn f = parse_order_fn(f_expr), h = parse_order_fn(h_expr);
        std::size_t n = 0;
        if (count) {
            n = *count;
        } else {
            while (n < cfg.N && inverse_after(f, h, Nat(static_cast<unsigned long>(n))) <= X.size()) ++n;
        }
        Nats Y = complex_to_lua(X, f, h, n);
        auto o = open_output(out);
        write_nats(o, Y);
        std::cout << "values " << Y.size() << "\n";
    });
    auto* l2c = cmd->add_subcommand("l2c", "pack X(n) into floor(log2 p(n))-bit blocks");
    files(l2c);
    l2c->add_option("--p", p_expr);
    l2c->callback([] {
        header("transform", "l2c");
        Nats X = load_nats(in);
        Bits Y = lua_to_complex(X, parse_order_fn(p_expr), X.size());
        auto o = open_output(out);
        write_bits(o, Y);
        std::cout << "blocks " << X.size() << "\nbits " << Y.size() << "\n";
    });
    auto* unp = cmd->add_subcommand("l2c-unpack", "inverse of l2c");
    files(unp);
    unp->add_option("--p", p_expr);
    unp->add_option("--count", count, "blocks to read (default: every complete block)");
    unp->callback([] {
        header("transform", "l2c-unpack");
        Bits Y = load_bits(in);
        OrderFn p = parse_order_fn(p_expr);
        std::size_t n = 0;
        if (count) {
            n = *count;
        } else {
            // complete blocks only; a zero-width block never ends the scan early
            std::size_t used = 0;
            for (std::size_t i = 0; i < 4096; ++i) {
                std::size_t w = bit_length(floor_at(p, Nat(static_cast<unsigned long>(i)))) - 1;
                if (used + w > Y.size() || (w == 0 && used == Y.size())) break;
                used += w;
                n = i + 1;
            }
        }
        Nats X = lua_unpack(Y, p, n);
        auto o = open_output(out);
        write_nats(o, X);
        std::cout << "blocks " << X.size() << "\n";
    });
    auto* sp = cmd->add_subcommand("spread", "Psi(X): longest prefix the planned stages determine, plan trace on stdout");
    files(sp);
    sp->add_option("--a", a_name, "sqrt or sqrt-adjusted");
    sp->add_option("--stages", stages);
    sp->callback([] {
        header("transform", "spread");
        Bits X = load_bits(in);
        ProgressionMap P = rumyantsev_plan(coefficients_named(a_name), stages);
        print_plan(P);
        Bits Y;
        if (!X.empty()) {
            std::size_t n = std::size_t{1} << P.stages.back().m;
            std::string part = rumyantsev_partial(P, X, n);
            Y = part.substr(0, part.find('?'));
        }
        auto o = open_output(out);
        write_bits(o, Y);
        std::cout << "bits " << Y.size() << "\n";
    });
    auto* rc = cmd->add_subcommand("recover", "sources of stage m from a 2^m segment of Psi(X) starting at k");
    files(rc);
    rc->add_option("--a", a_name);
    rc->add_option("--stages", stages);
    rc->add_option("--kmod", kmod, "k mod 2^m");
    rc->add_option("--m", m, "modulus exponent");
    rc->callback([] {
        header("transform", "recover");
        ProgressionMap P = rumyantsev_plan(coefficients_named(a_name), stages);
        Bits X = rumyantsev_recover(P, load_bits(in), kmod, m);
        auto o = open_output(out);
        write_bits(o, X);
        std::cout << "bits " << X.size() << "\n";
    });
    auto* ri = cmd->add_subcommand("reindex", "Y(x) = X(ax+b), or with --push Y(ax+b) = X(x)");
    files(ri);
    ri->add_option("--a", ra);
    ri->add_option("--b", rb);
    ri->add_option("--fill", fill);
    ri->add_flag("--push", push);
    ri->callback([] {
        header("transform", "reindex");
        Nats X = load_nats(in);
        Nats Y = affine_reindex(X, ra, rb, push ? Reindex::Pushforward : Reindex::Pullback, Nat(fill));
        auto o = open_output(out);
        write_nats(o, Y);
        std::cout << "values " << Y.size() << "\n";
    });
}

void add_check(CLI::App& app, RunConfig& cfg) {
    auto* cmd = app.add_subcommand("check", "avoidance and shift-complexity checks")->require_subcommand(1);
    static std::string file, p_expr = "exp2", program, delta = "1/2", c = "2";
    auto* av = cmd->add_subcommand("avoid", "X(n) < p(n) and X(n) != psi(n) for n < N");
    av->add_option("file", file)->required();
    av->add_option("--p", p_expr);
    av->add_option("--program", program, "psi is this counter program (default: the linear universal function)");
    av->callback([&] {
        header("check", "avoid");
        Nats X = load_nats(file);
        ProgramRegistry reg = desk_registry();
        PartialFn psi = psi_lin_universal(reg);
        if (!program.empty()) psi = psi_registered(reg, reg.register_program(parse_program(read_text(program))));
        std::size_t N = std::min(cfg.N, X.size());
        AvoidReport r = avoidance_check(X, psi, parse_order_fn(p_expr), N, cfg.s);
        const char* st = r.status == AvoidReport::Ok ? "ok" : r.status == AvoidReport::Clash ? "clash" : "bound-violation";
        std::cout << "horizon " << N << "\nstatus " << st << "\n";
        if (r.status != AvoidReport::Ok) std::cout << "at " << r.at << "\n";
        std::cout << "unresolved " << r.unresolved << "\n";
    });
    auto* sh = cmd->add_subcommand("shift", "<delta, c>-shift complexity against K_s over the desk registry");
    sh->add_option("file", file)->required();
    sh->add_option("--delta", delta);
    sh->add_option("--c", c);
    sh->callback([&] {
        header("check", "shift");
        Bits w = load_bits(file);
        ProgramRegistry reg = desk_registry();
        UniversalMachine U(reg, cfg.s);
        ShiftReport r = shift_complex_check(w, parse_rat(delta), parse_rat(c), U);
        std::cout << "length " << w.size() << "\nstage " << cfg.s << "\nstatus " << status_name(r.status) << "\n";
        if (r.status == ShiftReport::Violated)
            std::cout << "substring " << r.pos << " " << r.len << " code " << r.code_length << "\n";
        std::cout << "checked " << r.checked << "\nopen " << r.open << "\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"avoidance-lab workbench"};
    app.set_version_flag("--version", std::string(AVLAB_VERSION));
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("-k", cfg.k, "precision: brackets of width <= 2^-k");
    app.add_option("-N", cfg.N, "horizon");
    app.add_option("-s", cfg.s, "step budget");
    app.add_option("--seed", cfg.seed, "seed for randomized runs");
    add_series(app, cfg);
    add_orderfn(app, cfg);
    add_weights(app, cfg);
    add_machine(app, cfg);
    add_bushy(app, cfg);
    add_transform(app, cfg);
    add_check(app, cfg);
    app.parse_complete_callback([&] { check_config(cfg); });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cout.flush();
        std::cerr << "avlab: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
