/* Batched SHA-256 counter-mode expansion.
 *
 * expand(seeds, seed_len, tag, out_len) -> bytes
 *
 * For every seed s (seeds is the concatenation of n seeds of seed_len bytes)
 * emits the first out_len bytes of
 *     SHA256(tag || s || 0x00) || SHA256(tag || s || 0x01) || ...
 * Must stay byte-identical to hashing._expand_py.
 */
#define PY_SSIZE_T_CLEAN
#include <Python.h>
#include <openssl/sha.h>
#include <string.h>

#define MAX_SEED 64

static PyObject *
expand(PyObject *self, PyObject *args)
{
    Py_buffer seeds;
    Py_ssize_t seed_len, out_len;
    int tag;
    if (!PyArg_ParseTuple(args, "y*nin", &seeds, &seed_len, &tag, &out_len))
        return NULL;
    if (seed_len <= 0 || seed_len > MAX_SEED || seeds.len % seed_len != 0
        || out_len <= 0 || out_len > 255 * SHA256_DIGEST_LENGTH) {
        PyBuffer_Release(&seeds);
        PyErr_SetString(PyExc_ValueError, "bad seed or output length");
        return NULL;
    }
    Py_ssize_t n = seeds.len / seed_len;
    PyObject *result = PyBytes_FromStringAndSize(NULL, n * out_len);
    if (result == NULL) {
        PyBuffer_Release(&seeds);
        return NULL;
    }
    unsigned char *dst = (unsigned char *)PyBytes_AS_STRING(result);
    const unsigned char *src = (const unsigned char *)seeds.buf;
    unsigned char msg[MAX_SEED + 2];
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256_CTX ctx;
    int nblocks = (int)((out_len + SHA256_DIGEST_LENGTH - 1) / SHA256_DIGEST_LENGTH);

    Py_BEGIN_ALLOW_THREADS
    msg[0] = (unsigned char)tag;
    for (Py_ssize_t i = 0; i < n; i++) {
        memcpy(msg + 1, src + i * seed_len, seed_len);
        Py_ssize_t left = out_len;
        unsigned char *o = dst + i * out_len;
        for (int c = 0; c < nblocks; c++) {
            msg[1 + seed_len] = (unsigned char)c;
            SHA256_Init(&ctx);
            SHA256_Update(&ctx, msg, seed_len + 2);
            SHA256_Final(digest, &ctx);
            Py_ssize_t take = left < SHA256_DIGEST_LENGTH ? left : SHA256_DIGEST_LENGTH;
            memcpy(o, digest, take);
            o += take;
            left -= take;
        }
    }
    Py_END_ALLOW_THREADS

    PyBuffer_Release(&seeds);
    return result;
}

static PyMethodDef methods[] = {
    {"expand", expand, METH_VARARGS, "Batched SHA-256 counter-mode expansion."},
    {NULL, NULL, 0, NULL}
};

static struct PyModuleDef module = {
    PyModuleDef_HEAD_INIT, "_prg", NULL, -1, methods
};

PyMODINIT_FUNC
PyInit__prg(void)
{
    return PyModule_Create(&module);
}
