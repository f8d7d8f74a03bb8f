from opentelemetry import metrics

# Use the same meter for all metrics
train_meter = metrics.get_meter("hafrm.train")
eval_meter = metrics.get_meter("hafrm.eval")

# Training metrics
train_step_counter = train_meter.create_counter(
    "train.steps", description="Number of optimizer steps taken", unit="1"
)

train_loss = train_meter.create_histogram(
    "train.objective", unit="1", description="Training objective per step"
)

validation_accuracy = train_meter.create_histogram(
    "train.validation.accuracy", unit="1", description="Validation pairwise accuracy"
)

validation_duration = train_meter.create_histogram(
    "train.validation.duration.ms", unit="ms", description="Duration of a validation pass"
)

checkpoint_counter = train_meter.create_counter(
    "train.checkpoints", description="Number of checkpoints written", unit="1"
)

# Error metrics
numeric_abort_counter = train_meter.create_counter(
    "train.numeric_aborts",
    description="Number of runs aborted because of non-finite losses",
    unit="1",
)

# Evaluation metrics
eval_run_counter = eval_meter.create_counter(
    "eval.runs", description="Number of evaluation runs by kind", unit="1"
)

eval_items = eval_meter.create_counter(
    "eval.items", description="Number of pairs or prompts scored", unit="1"
)

eval_duration = eval_meter.create_histogram(
    "eval.duration.ms", unit="ms", description="Duration of evaluation runs"
)

# Command metrics
command_counter = eval_meter.create_counter(
    "cli.commands", description="Number of CLI commands executed", unit="1"
)


# Helper functions
def record_train_step(mode: str, objective: float):
    """Record one optimizer step."""
    train_step_counter.add(1, {"mode": mode})
    train_loss.record(objective, {"mode": mode})


def record_validation(accuracy: float, duration_ms: float):
    """Record a validation pass."""
    validation_accuracy.record(accuracy)
    validation_duration.record(duration_ms)


def record_checkpoint_saved(kind: str):
    """Record checkpoint write (step, best, reference)."""
    checkpoint_counter.add(1, {"kind": kind})


def record_numeric_abort(step: int):
    """Record an aborted run."""
    numeric_abort_counter.add(1, {"step": str(step)})


def record_eval_run(kind: str, n_items: int, duration_ms: float):
    """Record an evaluation run (accuracy, ood, best_of_n)."""
    eval_run_counter.add(1, {"kind": kind})
    eval_items.add(n_items, {"kind": kind})
    eval_duration.record(duration_ms, {"kind": kind})


def record_command(name: str, status: str):
    """Record CLI command execution."""
    command_counter.add(1, {"command": name, "status": status})
