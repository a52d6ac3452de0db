#include "pacman/txn.hpp"

#include <algorithm>
#include <thread>

namespace pacman {

const char* abort_cause_name(AbortCause c) {
    switch (c) {
        case AbortCause::none: return "none";
        case AbortCause::insert_duplicate: return "insert_duplicate";
        case AbortCause::delete_absent: return "delete_absent";
        case AbortCause::null_arithmetic: return "null_arithmetic";
        case AbortCause::type_mismatch: return "type_mismatch";
        case AbortCause::null_key: return "null_key";
        case AbortCause::null_write_value: return "null_write_value";
        case AbortCause::arity_mismatch: return "arity_mismatch";
        case AbortCause::lock_die: return "lock_die";
        case AbortCause::unknown_procedure: return "unknown_procedure";
    }
    return "?";
}

void VarEnv::bind(const std::string& name, std::optional<Value> v) {
    for (auto& [n, val] : vars_) {
        if (n == name) {
            val = std::move(v);
            return;
        }
    }
    vars_.emplace_back(name, std::move(v));
}

const std::optional<Value>* VarEnv::lookup(const std::string& name) const {
    for (auto& [n, val] : vars_)
        if (n == name) return &val;
    return nullptr;
}

std::optional<Value> eval_expr(const Expr& e, const VarEnv& env) {
    switch (e.kind) {
        case Expr::Kind::literal: return e.literal;
        case Expr::Kind::ref: {
            const auto* v = env.lookup(e.name);
            if (!v) throw TxnAbort{AbortCause::null_arithmetic, "unbound variable " + e.name};
            return *v;
        }
        case Expr::Kind::add:
        case Expr::Kind::sub: {
            auto l = eval_expr(*e.lhs, env);
            auto r = eval_expr(*e.rhs, env);
            if (!l || !r)
                throw TxnAbort{AbortCause::null_arithmetic, "null operand in arithmetic"};
            if (!is_int(*l) || !is_int(*r))
                throw TxnAbort{AbortCause::type_mismatch, "arithmetic on string value"};
            int64_t a = std::get<int64_t>(*l), b = std::get<int64_t>(*r);
            return Value{e.kind == Expr::Kind::add ? a + b : a - b};
        }
    }
    throw TxnAbort{AbortCause::type_mismatch, "bad expression"};
}

Value eval_expr_not_null(const Expr& e, const VarEnv& env, AbortCause null_cause) {
    auto v = eval_expr(e, env);
    if (!v) throw TxnAbort{null_cause, "expression evaluated to null"};
    return *v;
}

bool guard_passes(const Guard& g, const VarEnv& env) {
    const auto* v = env.lookup(g.var);
    bool is_null = (v == nullptr) || !v->has_value();
    return is_null == g.expect_null;
}

std::optional<Value> DirectAccess::read(const std::string& table, const Value& key) {
    return db_.get(table, key);
}

void DirectAccess::write(const std::string& table, const Value& key, const Value& value) {
    db_.put(table, key, value);
}

void DirectAccess::insert(const std::string& table, const Value& key, const Value& value) {
    if (db_.insert(table, key, value) != StoreResult::ok)
        throw ReplayDivergence("insert of existing key '" + value_to_string(key) +
                               "' into " + table + " during replay");
}

void DirectAccess::erase(const std::string& table, const Value& key) {
    if (db_.erase(table, key) != StoreResult::ok)
        throw ReplayDivergence("delete of absent key '" + value_to_string(key) +
                               "' from " + table + " during replay");
}

void TxnAccess::lock(const std::string& table, const Value& key, bool exclusive) {
    if (!locks_) return;
    LockId id{table, key};
    if (!locks_->acquire(ts_, id, exclusive))
        throw TxnAbort{AbortCause::lock_die, "lock conflict"};
    held_.push_back(std::move(id));
}

std::optional<Value> TxnAccess::visible(const std::string& table, const Value& key) {
    auto it = last_write_.find({table, key});
    if (it != last_write_.end()) return write_set_[it->second].value;
    return db_.get(table, key);
}

std::optional<Value> TxnAccess::read(const std::string& table, const Value& key) {
    lock(table, key, false);
    return visible(table, key);
}

void TxnAccess::buffer(WriteOp w) {
    last_write_[{w.table, w.key}] = write_set_.size();
    write_set_.push_back(std::move(w));
}

void TxnAccess::write(const std::string& table, const Value& key, const Value& value) {
    db_.table(table);  // surface unknown table before locking
    lock(table, key, true);
    buffer({table, key, value});
}

void TxnAccess::insert(const std::string& table, const Value& key, const Value& value) {
    lock(table, key, true);
    if (visible(table, key).has_value())
        throw TxnAbort{AbortCause::insert_duplicate,
                       "insert of existing key '" + value_to_string(key) + "' into " + table};
    buffer({table, key, value});
}

void TxnAccess::erase(const std::string& table, const Value& key) {
    lock(table, key, true);
    if (!visible(table, key).has_value())
        throw TxnAbort{AbortCause::delete_absent,
                       "delete of absent key '" + value_to_string(key) + "' from " + table};
    buffer({table, key, std::nullopt});
}

void TxnAccess::apply_writes() {
    for (const WriteOp& w : write_set_) db_.apply_write(w);
}

void TxnAccess::release_locks() {
    if (locks_) locks_->release_all(ts_, held_);
    held_.clear();
}

bool run_op(const Operation& op, VarEnv& env, StorageAccess& acc) {
    if (op.guard && !guard_passes(*op.guard, env)) {
        if (op.out_var) env.bind(*op.out_var, std::nullopt);  // skipped read yields null
        return false;
    }
    Value key = eval_expr_not_null(op.key_expr, env, AbortCause::null_key);
    switch (op.kind) {
        case OpKind::read:
            env.bind(*op.out_var, acc.read(op.table, key));
            break;
        case OpKind::write:
            acc.write(op.table, key,
                      eval_expr_not_null(*op.value_expr, env, AbortCause::null_write_value));
            break;
        case OpKind::insert:
            acc.insert(op.table, key,
                       eval_expr_not_null(*op.value_expr, env, AbortCause::null_write_value));
            break;
        case OpKind::del:
            acc.erase(op.table, key);
            break;
    }
    return true;
}

void ProcRegistry::add(AnalyzedProcedure proc) {
    index_[proc.ir.name] = procs_.size();
    procs_.push_back(std::move(proc));
}

const AnalyzedProcedure* ProcRegistry::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &procs_[it->second];
}

std::vector<std::string> ProcRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& p : procs_) out.push_back(p.ir.name);
    return out;
}

ProcRegistry ProcRegistry::from_sources(const std::vector<std::string>& sources) {
    ProcRegistry reg;
    for (const std::string& src : sources)
        for (ProcedureIR& ir : parse_procedures(src)) reg.add(analyze_procedure(std::move(ir)));
    return reg;
}

uint64_t CommitClock::current_epoch() const {
    std::lock_guard lk(mutex_);
    return epoch_;
}

uint64_t CommitClock::advance_epoch() {
    std::lock_guard lk(mutex_);
    return ++epoch_;
}

std::pair<uint64_t, uint64_t> CommitClock::commit(
    const std::function<void(uint64_t, uint64_t)>& fn) {
    std::lock_guard lk(mutex_);
    uint64_t seq = next_seq_++;
    if (fn) fn(seq, epoch_);
    return {seq, epoch_};
}

uint64_t CommitClock::committed_count() const {
    std::lock_guard lk(mutex_);
    return next_seq_ - 1;
}

TxnResult execute(Database& db, const AnalyzedProcedure& proc,
                  const std::vector<Value>& args, LockManager* locks, uint64_t ts,
                  CommitClock* clock,
                  const std::function<void(uint64_t, uint64_t, const TxnResult&)>& on_commit) {
    TxnResult result;
    TxnAccess acc(db, locks, ts);
    try {
        if (args.size() != proc.ir.params.size())
            throw TxnAbort{AbortCause::arity_mismatch,
                           proc.ir.name + " expects " + std::to_string(proc.ir.params.size()) +
                               " args, got " + std::to_string(args.size())};
        VarEnv env;
        for (size_t i = 0; i < args.size(); i++) env.bind(proc.ir.params[i], args[i]);
        for (const Operation& op : proc.ir.ops) run_op(op, env, acc);

        result.committed = true;
        result.write_set = acc.write_set();
        result.outputs = env.entries();
        if (clock) {
            auto [seq, epoch] = clock->commit([&](uint64_t s, uint64_t e) {
                if (on_commit) {
                    result.commit_seq = s;
                    result.epoch = e;
                    on_commit(s, e, result);
                }
            });
            result.commit_seq = seq;
            result.epoch = epoch;
        }
        acc.apply_writes();
        acc.release_locks();
        return result;
    } catch (const TxnAbort& abort) {
        acc.release_locks();
        result.committed = false;
        result.abort_cause = abort.cause;
        return result;
    }
}

TxnResult execute_single(Database& db, const AnalyzedProcedure& proc,
                         const std::vector<Value>& args) {
    return execute(db, proc, args, nullptr, 0, nullptr, nullptr);
}

WorkloadRunner::WorkloadRunner(Database& db, const ProcRegistry& registry, size_t workers,
                               CommitClock& clock)
    : db_(db), registry_(registry), clock_(clock) {
    if (workers == 0) workers = 1;
    for (size_t i = 0; i < workers; i++)
        workers_.emplace_back([this, i] { worker_loop(i); });
}

WorkloadRunner::~WorkloadRunner() {
    {
        std::lock_guard lk(mutex_);
        shutdown_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void WorkloadRunner::run_batch(std::span<const TxnRequest> requests,
                               std::vector<TxnResult>* results) {
    if (requests.empty()) return;
    if (results) results->resize(requests.size());
    {
        std::lock_guard lk(mutex_);
        batch_ = requests;
        results_ = results;
        next_request_.store(0);
        remaining_ = requests.size();
        generation_++;
    }
    work_cv_.notify_all();
    std::unique_lock lk(mutex_);
    done_cv_.wait(lk, [&] { return remaining_ == 0 && active_workers_ == 0; });
    batch_ = {};
    results_ = nullptr;
}

void WorkloadRunner::worker_loop(size_t worker_id) {
    uint64_t seen_generation = 0;
    while (true) {
        std::span<const TxnRequest> batch;
        {
            std::unique_lock lk(mutex_);
            work_cv_.wait(lk, [&] {
                return shutdown_ || (generation_ != seen_generation && remaining_ > 0);
            });
            if (shutdown_) return;
            seen_generation = generation_;
            batch = batch_;
            active_workers_++;
        }
        while (true) {
            size_t idx = next_request_.fetch_add(1);
            if (idx >= batch.size()) break;
            const TxnRequest& req = batch[idx];
            TxnResult result;
            const AnalyzedProcedure* proc = registry_.find(req.proc);
            if (!proc) {
                result.committed = false;
                result.abort_cause = AbortCause::unknown_procedure;
            } else {
                uint64_t ts = next_ts_.fetch_add(1);
                while (true) {
                    result = execute(db_, *proc, req.args, &locks_, ts, &clock_,
                                     [&](uint64_t seq, uint64_t epoch, const TxnResult& r) {
                                         if (commit_hook_)
                                             commit_hook_(worker_id, seq, epoch, req, r);
                                     });
                    if (result.committed || result.abort_cause != AbortCause::lock_die) break;
                    std::this_thread::yield();
                }
            }
            {
                std::lock_guard lk(mutex_);
                if (results_) (*results_)[idx] = std::move(result);
                if (--remaining_ == 0) done_cv_.notify_all();
            }
        }
        {
            std::lock_guard lk(mutex_);
            if (--active_workers_ == 0 && remaining_ == 0) done_cv_.notify_all();
        }
    }
}

std::vector<TxnResult> run_workload(Database& db, const ProcRegistry& registry,
                                    std::span<const TxnRequest> requests,
                                    size_t worker_count) {
    CommitClock clock;
    WorkloadRunner runner(db, registry, worker_count, clock);
    std::vector<TxnResult> results;
    runner.run_batch(requests, &results);
    return results;
}

}  // namespace pacman
