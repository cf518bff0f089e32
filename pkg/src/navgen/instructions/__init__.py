from navgen.instructions.grammar import (
    L_MAX,
    STYLES,
    Instruction,
    generate_instruction,
    join_instructions,
    signed_turn,
    turn_word,
)
from navgen.instructions.vocab import (
    BOS,
    DEFAULT_VOCAB,
    EOS,
    GRAMMAR_VERSION,
    PAD,
    UNK,
    Vocab,
    build_vocab,
    detokenize,
    tokenize,
)
