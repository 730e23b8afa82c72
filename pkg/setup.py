from setuptools import setup

setup(
    name='orthobot',
    version='0.1.0',
    packages=[
        'orthobot',
        'orthobot.applications',
        'orthobot.chaos',
        'orthobot.data',
        'orthobot.optimiser',
        'orthobot.polynomials'
    ],
    install_requires=open('requirements.txt').readlines()
)
