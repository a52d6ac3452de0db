#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pacman/analysis.hpp"
#include "pacman/lock_manager.hpp"
#include "pacman/storage.hpp"

namespace pacman {

enum class AbortCause {
    none,
    insert_duplicate,
    delete_absent,
    null_arithmetic,
    type_mismatch,
    null_key,
    null_write_value,
    arity_mismatch,
    lock_die,
    unknown_procedure,
};

const char* abort_cause_name(AbortCause c);

// internal control flow for transaction aborts
struct TxnAbort {
    AbortCause cause;
    std::string detail;
};

// replay of a committed transaction diverged from its original execution
struct ReplayDivergence : std::runtime_error {
    explicit ReplayDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct UnrecoverableLogError : std::runtime_error {
    explicit UnrecoverableLogError(const std::string& what) : std::runtime_error(what) {}
};

// var -> value (nullopt = null); procedures are tiny, linear scan wins
class VarEnv {
  public:
    void bind(const std::string& name, std::optional<Value> v);
    const std::optional<Value>* lookup(const std::string& name) const;
    const std::vector<std::pair<std::string, std::optional<Value>>>& entries() const {
        return vars_;
    }

  private:
    std::vector<std::pair<std::string, std::optional<Value>>> vars_;
};

std::optional<Value> eval_expr(const Expr& e, const VarEnv& env);
Value eval_expr_not_null(const Expr& e, const VarEnv& env, AbortCause null_cause);
bool guard_passes(const Guard& g, const VarEnv& env);

// Mediates row access for the interpreter. Mutations throw TxnAbort on
// constraint violations (duplicate insert, absent delete).
class StorageAccess {
  public:
    virtual ~StorageAccess() = default;
    virtual std::optional<Value> read(const std::string& table, const Value& key) = 0;
    virtual void write(const std::string& table, const Value& key, const Value& value) = 0;
    virtual void insert(const std::string& table, const Value& key, const Value& value) = 0;
    virtual void erase(const std::string& table, const Value& key) = 0;
};

// Direct, latch-free access used by the recovery engine; constraint
// violations mean the replay diverged and are fatal.
class DirectAccess : public StorageAccess {
  public:
    explicit DirectAccess(Database& db) : db_(db) {}
    std::optional<Value> read(const std::string& table, const Value& key) override;
    void write(const std::string& table, const Value& key, const Value& value) override;
    void insert(const std::string& table, const Value& key, const Value& value) override;
    void erase(const std::string& table, const Value& key) override;

  private:
    Database& db_;
};

// Buffered access with strict two-phase locking; writes apply at commit
class TxnAccess : public StorageAccess {
  public:
    TxnAccess(Database& db, LockManager* locks, uint64_t ts) : db_(db), locks_(locks), ts_(ts) {}

    std::optional<Value> read(const std::string& table, const Value& key) override;
    void write(const std::string& table, const Value& key, const Value& value) override;
    void insert(const std::string& table, const Value& key, const Value& value) override;
    void erase(const std::string& table, const Value& key) override;

    const std::vector<WriteOp>& write_set() const { return write_set_; }
    void apply_writes();   // caller must still hold locks
    void release_locks();

  private:
    std::optional<Value> visible(const std::string& table, const Value& key);
    void lock(const std::string& table, const Value& key, bool exclusive);
    void buffer(WriteOp w);

    Database& db_;
    LockManager* locks_;
    uint64_t ts_;
    std::vector<WriteOp> write_set_;  // program order
    std::map<std::pair<std::string, Value>, size_t> last_write_;  // overlay
    std::vector<LockId> held_;
};

// executes one operation; returns false when its guard skipped it
bool run_op(const Operation& op, VarEnv& env, StorageAccess& acc);

struct TxnRequest {
    std::string proc;
    std::vector<Value> args;
    bool adhoc = false;
};

struct TxnResult {
    bool committed = false;
    AbortCause abort_cause = AbortCause::none;
    uint64_t commit_seq = 0;
    uint64_t epoch = 0;
    std::vector<WriteOp> write_set;
    std::vector<std::pair<std::string, std::optional<Value>>> outputs;
};

class ProcRegistry {
  public:
    void add(AnalyzedProcedure proc);
    const AnalyzedProcedure* find(const std::string& name) const;
    const std::vector<AnalyzedProcedure>& procs() const { return procs_; }
    std::vector<std::string> names() const;

    static ProcRegistry from_sources(const std::vector<std::string>& sources);

  private:
    std::vector<AnalyzedProcedure> procs_;
    std::map<std::string, size_t> index_;
};

// Atomic (commit_seq, epoch) assignment; keeping both under one mutex makes
// epoch membership a prefix of the commit order.
class CommitClock {
  public:
    uint64_t current_epoch() const;
    uint64_t advance_epoch();
    // runs fn(seq, epoch) inside the critical section (log buffering)
    std::pair<uint64_t, uint64_t> commit(
        const std::function<void(uint64_t, uint64_t)>& fn);
    uint64_t committed_count() const;

  private:
    mutable std::mutex mutex_;
    uint64_t next_seq_ = 1;
    uint64_t epoch_ = 1;
};

// Serial one-shot execution. Locked mode (locks != nullptr) may abort with
// lock_die; the caller retries. The commit callback is invoked inside the
// clock's critical section before any lock is released.
TxnResult execute(Database& db, const AnalyzedProcedure& proc,
                  const std::vector<Value>& args, LockManager* locks, uint64_t ts,
                  CommitClock* clock,
                  const std::function<void(uint64_t, uint64_t, const TxnResult&)>& on_commit);

// Convenience wrapper without locking or commit sequencing (tests, oracles).
TxnResult execute_single(Database& db, const AnalyzedProcedure& proc,
                         const std::vector<Value>& args);

// Fixed worker pool executing request batches; results land at the request's
// index, commit order is read from commit_seq.
class WorkloadRunner {
  public:
    WorkloadRunner(Database& db, const ProcRegistry& registry, size_t workers,
                   CommitClock& clock);
    ~WorkloadRunner();

    using CommitHook = std::function<void(size_t worker, uint64_t seq, uint64_t epoch,
                                          const TxnRequest&, const TxnResult&)>;
    void set_commit_hook(CommitHook hook) { commit_hook_ = std::move(hook); }

    // executes all requests, blocking until the batch drains (epoch quiesce)
    void run_batch(std::span<const TxnRequest> requests, std::vector<TxnResult>* results);

    LockManager& lock_manager() { return locks_; }
    size_t worker_count() const { return workers_.size(); }

  private:
    void worker_loop(size_t worker_id);

    Database& db_;
    const ProcRegistry& registry_;
    CommitClock& clock_;
    LockManager locks_;
    CommitHook commit_hook_;

    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::span<const TxnRequest> batch_;
    std::vector<TxnResult>* results_ = nullptr;
    std::atomic<size_t> next_request_{0};
    size_t remaining_ = 0;
    size_t active_workers_ = 0;
    uint64_t generation_ = 0;
    bool shutdown_ = false;
    std::atomic<uint64_t> next_ts_{1};

    std::vector<std::thread> workers_;
};

// run_workload: executes the full request stream and returns results indexed
// by request; commit order is recoverable from commit_seq.
std::vector<TxnResult> run_workload(Database& db, const ProcRegistry& registry,
                                    std::span<const TxnRequest> requests,
                                    size_t worker_count);

}  // namespace pacman
