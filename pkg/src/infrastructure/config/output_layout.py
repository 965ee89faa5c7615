# src/infrastructure/config/output_layout.py


class OutputLayout:
    """Caminhos relativos dos artefatos dentro do diretório de saída."""

    CORPUS_PREFIX = "corpus/"    # Corpus sintético (JDSP + manifesto)
    CORRUPT_PREFIX = "corrupt/"  # Inspeção do processo direto
    MODELS_PREFIX = "models/"    # Checkpoints JDMP e relatório de treino
    SYNTH_PREFIX = "synth/"      # Sínteses por execução
    EVAL_PREFIX = "eval/"        # Métricas e heatmaps

    @staticmethod
    def corpus_manifest():
        return f"{OutputLayout.CORPUS_PREFIX}manifest.json"

    @staticmethod
    def corpus_spectrogram(utterance_id):
        return f"{OutputLayout.CORPUS_PREFIX}{utterance_id}.jdsp"

    @staticmethod
    def corrupt_path(utterance_id, t, suffix):
        return f"{OutputLayout.CORRUPT_PREFIX}{utterance_id}_t{t:.3f}.{suffix}"

    @staticmethod
    def model_path(name):
        return f"{OutputLayout.MODELS_PREFIX}{name}.jdmp"

    @staticmethod
    def training_report():
        return f"{OutputLayout.MODELS_PREFIX}training_report.csv"

    @staticmethod
    def synth_dir(tag):
        return f"{OutputLayout.SYNTH_PREFIX}{tag}/"

    @staticmethod
    def synth_path(tag, utterance_id, suffix):
        return f"{OutputLayout.SYNTH_PREFIX}{tag}/{utterance_id}.{suffix}"

    @staticmethod
    def eval_path(tag, name):
        return f"{OutputLayout.EVAL_PREFIX}{tag}/{name}"
